#pragma once

#include "valvebench/devicebus/supervisor.hpp"
#include "valvebench/env/gripper_env.hpp"

namespace valvebench::devicebus {

struct HardwareEnvConfig {
  env::EnvConfig env;
  double joint_offset_deg = 180.0;  // servo reading for joint angle 0
  Micros step_period{100'000};
  Micros reset_settle{500'000};
};

/// The reset/step contract over a servo bus: goals go out as one grouped
/// write, positions and the valve encoder are polled back, and the reward is
/// the simulator's. The valve cannot be placed, so the valve stream of
/// ResetRng is left untouched and the goal is relative to wherever the valve
/// sits. A ManualInterventionRequired mid-episode marks the episode invalid
/// and propagates.
class HardwareValveEnv final : public env::Environment {
 public:
  HardwareValveEnv(Supervisor& supervisor, HardwareEnvConfig config);

  std::size_t observation_size() const override { return env::kObservationSize; }
  std::size_t action_size() const override { return env::kJointCount; }
  int steps_per_episode() const override { return config_.env.steps_per_episode; }

  std::vector<double> reset(env::ResetRng rng) override;
  env::StepResult step(std::span<const double> action) override;

  /// Bookkeeping only; the physical state cannot be restored.
  void save_state(ArchiveWriter& out) const override;
  void load_state(ArchiveReader& in) override;

  bool episode_invalid() const { return invalid_; }
  const env::JointVector& joints() const { return q_; }
  double valve_angle() const { return valve_; }
  double goal_angle() const { return goal_; }

 private:
  void command(const env::JointVector& joint_goals);
  void poll();
  template <class F>
  auto guarded(F&& f) -> decltype(f());

  Supervisor& sup_;
  HardwareEnvConfig config_;
  env::JointVector q_{};
  double valve_ = 0.0;
  double goal_ = 0.0;
  int step_index_ = 0;
  bool done_ = true;
  bool started_ = false;
  bool invalid_ = false;
};

}  // namespace valvebench::devicebus
