#pragma once

namespace valvebench::env {

/// Wraps any finite angle into [0, 360).
double wrap360(double degrees);

/// Minimal signed rotation taking b onto a, in (-180, 180].
double angdiff(double a, double b);

}  // namespace valvebench::env
