#include "valvebench/env/environment.hpp"

#include <string>

#include "valvebench/common/errors.hpp"

namespace valvebench::env {

std::string_view task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Fixed90: return "90";
    case TaskKind::Choice90_180_270: return "90_180_270";
    case TaskKind::Range30_330: return "30_330";
  }
  return "90";
}

TaskKind task_from_string(std::string_view name) {
  if (name == "90" || name == "fixed90") return TaskKind::Fixed90;
  if (name == "90_180_270" || name == "90,180,270" || name == "choice") {
    return TaskKind::Choice90_180_270;
  }
  if (name == "30_330" || name == "30-330" || name == "range") return TaskKind::Range30_330;
  throw FormatError("unknown task '" + std::string(name) + "' (expected 90, 90_180_270, 30_330)");
}

double sample_goal_offset(TaskKind kind, CounterRng& rng) {
  switch (kind) {
    case TaskKind::Fixed90: return 90.0;
    case TaskKind::Choice90_180_270: return 90.0 * static_cast<double>(1 + rng.below(3));
    case TaskKind::Range30_330: return rng.uniform(30.0, 330.0);
  }
  return 90.0;
}

}  // namespace valvebench::env
