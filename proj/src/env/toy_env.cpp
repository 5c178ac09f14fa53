#include "valvebench/env/toy_env.hpp"

#include <algorithm>
#include <string>

#include "valvebench/common/errors.hpp"
#include "valvebench/env/angles.hpp"
#include "valvebench/env/reward.hpp"

namespace valvebench::env {

ToyAngleEnv::ToyAngleEnv(double epsilon, double max_turn, int steps_per_episode)
    : epsilon_(epsilon), max_turn_(max_turn), steps_per_episode_(steps_per_episode) {
  require(epsilon > 0 && max_turn > 0 && steps_per_episode > 0, "ToyAngleEnv: invalid parameters");
}

std::vector<double> ToyAngleEnv::reset(ResetRng rng) {
  angle_ = rng.valve.uniform(0.0, 360.0);
  goal_ = wrap360(angle_ + rng.goal.uniform(0.0, 360.0));
  step_index_ = 0;
  done_ = false;
  return observe();
}

StepResult ToyAngleEnv::step(std::span<const double> action) {
  require(action.size() == 1, "ToyAngleEnv: action must have one component");
  if (done_) throw ContractViolation("step: episode already finished; call reset()");
  const double before = angle_;
  angle_ = wrap360(angle_ + max_turn_ * std::clamp(action[0], -1.0, 1.0));
  const auto r = compute_reward({before, angle_, goal_, epsilon_});
  ++step_index_;
  done_ = r.reached || step_index_ >= steps_per_episode_;
  return {observe(), r.reward, done_, r.reached, step_index_};
}

std::vector<double> ToyAngleEnv::observe() const { return {angdiff(goal_, angle_) / 180.0}; }

void ToyAngleEnv::save_state(ArchiveWriter& out) const {
  out.scalar("toy_angle", angle_);
  out.scalar("toy_goal", goal_);
  out.text("toy_flags", std::to_string(step_index_) + " " + std::to_string(int(done_)));
}

void ToyAngleEnv::load_state(ArchiveReader& in) {
  angle_ = in.scalar("toy_angle");
  goal_ = in.scalar("toy_goal");
  const auto flags = in.record("toy_flags");
  if (flags.size() != 2) throw FormatError("checkpoint: malformed toy_flags");
  step_index_ = static_cast<int>(parse_int(flags[0]));
  done_ = parse_int(flags[1]) != 0;
}

}  // namespace valvebench::env
