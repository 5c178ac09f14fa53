#include "valvebench/env/angles.hpp"

#include <cmath>

namespace valvebench::env {

double wrap360(double degrees) {
  double w = std::fmod(degrees, 360.0);
  if (w < 0.0) w += 360.0;
  // fmod of a tiny negative value plus 360 can round up to 360 exactly.
  if (w >= 360.0) w = 0.0;
  return w;
}

double angdiff(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

}  // namespace valvebench::env
