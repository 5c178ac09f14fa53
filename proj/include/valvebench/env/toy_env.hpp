#pragma once

#include "valvebench/env/environment.hpp"

namespace valvebench::env {

/// One-dimensional goal-reaching MDP: the observation is the wrapped angle
/// error (goal - angle) / 180 and the single action turns the angle by up to
/// +-max_turn degrees. Rewards use the same compute_reward as the gripper.
class ToyAngleEnv final : public Environment {
 public:
  explicit ToyAngleEnv(double epsilon = 3.0, double max_turn = 20.0, int steps_per_episode = 50);

  std::size_t observation_size() const override { return 1; }
  std::size_t action_size() const override { return 1; }
  int steps_per_episode() const override { return steps_per_episode_; }

  std::vector<double> reset(ResetRng rng) override;
  StepResult step(std::span<const double> action) override;

  void save_state(ArchiveWriter& out) const override;
  void load_state(ArchiveReader& in) override;

  double angle() const { return angle_; }
  double goal() const { return goal_; }

 private:
  std::vector<double> observe() const;

  double epsilon_;
  double max_turn_;
  int steps_per_episode_;
  double angle_ = 0.0;
  double goal_ = 0.0;
  int step_index_ = 0;
  bool done_ = true;
};

}  // namespace valvebench::env
