#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "valvebench/common/archive.hpp"
#include "valvebench/common/rng.hpp"

namespace valvebench::env {

enum class TaskKind { Fixed90, Choice90_180_270, Range30_330 };

std::string_view task_name(TaskKind kind);  // "90", "90_180_270", "30_330"
TaskKind task_from_string(std::string_view name);

struct TaskSpec {
  TaskKind kind = TaskKind::Fixed90;
  double epsilon = 3.0;  // degrees
};

/// Offset of the goal from the starting valve angle for one episode.
double sample_goal_offset(TaskKind kind, CounterRng& rng);

/// Streams consumed by reset(): the starting valve angle and the goal offset.
struct ResetRng {
  CounterRng& valve;
  CounterRng& goal;
};

struct StepResult {
  std::vector<double> observation;  // normalized view fed to networks
  double reward = 0.0;
  bool done = false;
  bool reached = false;
  int step_index = 0;
};

/// reset/step contract shared by the simulator, the toy MDP and the hardware
/// adapter. Observations are exchanged in their normalized [-1, 1] form.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t observation_size() const = 0;
  virtual std::size_t action_size() const = 0;
  virtual int steps_per_episode() const = 0;

  virtual std::vector<double> reset(ResetRng rng) = 0;
  /// Components outside [-1, 1] are clamped. Throws ContractViolation after done.
  virtual StepResult step(std::span<const double> action) = 0;

  /// Mid-episode state for checkpoint/resume.
  virtual void save_state(ArchiveWriter& out) const = 0;
  virtual void load_state(ArchiveReader& in) = 0;
};

}  // namespace valvebench::env
