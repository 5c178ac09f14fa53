#include "valvebench/env/reward.hpp"

#include <cmath>

#include "valvebench/common/errors.hpp"
#include "valvebench/env/angles.hpp"

namespace valvebench::env {

double RewardContext::gap_before() const { return std::abs(angdiff(goal, before)); }
double RewardContext::gap_after() const { return std::abs(angdiff(goal, after)); }

RewardResult compute_reward(const RewardContext& ctx) {
  require(ctx.epsilon > 0.0, "compute_reward: epsilon must be positive");
  const double gap_b = ctx.gap_before();
  const double gap_a = ctx.gap_after();
  const double progress = gap_b - gap_a;
  const bool reached = gap_a < ctx.epsilon;
  if (std::abs(progress) < ctx.epsilon) return {-1.0, reached, RewardBranch::Stagnation};
  if (reached) return {10.0, true, RewardBranch::Goal};
  if (gap_b == 0.0) {
    throw InvariantViolation("compute_reward: zero starting gap with non-negligible change; the "
                             "episode should already have terminated");
  }
  return {progress / gap_b, false, RewardBranch::Progress};
}

}  // namespace valvebench::env
