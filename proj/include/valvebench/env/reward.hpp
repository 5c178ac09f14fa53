#pragma once

namespace valvebench::env {

/// Angles (degrees) around one step. Differences to the goal are wrap-aware
/// distances in [0, 180].
struct RewardContext {
  double before = 0.0;
  double after = 0.0;
  double goal = 0.0;
  double epsilon = 3.0;

  double gap_before() const;  // |goal - before| wrapped
  double gap_after() const;   // |goal - after| wrapped
  double progress() const { return gap_before() - gap_after(); }
};

enum class RewardBranch { Stagnation, Goal, Progress };

struct RewardResult {
  double reward = 0.0;
  bool reached = false;
  RewardBranch branch = RewardBranch::Progress;
};

/// Per-step reward:
///   -1               if |progress| < epsilon
///   +10              else if gap_after < epsilon
///   progress / gap_before otherwise
/// `reached` is gap_after < epsilon whichever branch fired.
RewardResult compute_reward(const RewardContext& ctx);

}  // namespace valvebench::env
