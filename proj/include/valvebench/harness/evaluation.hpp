#pragma once

#include <span>
#include <vector>

#include "valvebench/agents/agent.hpp"
#include "valvebench/env/environment.hpp"
#include "valvebench/env/scripted_controller.hpp"

namespace valvebench::harness {

/// Anything that maps normalized observations to actions in [-1, 1].
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode() {}
  virtual std::vector<double> act(std::span<const double> observation) = 0;
};

/// Greedy (noise-free) actions of a learned agent.
class GreedyAgentPolicy final : public Policy {
 public:
  explicit GreedyAgentPolicy(const agents::Agent& agent) : agent_(agent) {}
  std::vector<double> act(std::span<const double> observation) override;

 private:
  const agents::Agent& agent_;
};

/// The hand-written gripper controller behind the Policy interface.
class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(env::EnvConfig config);
  void begin_episode() override { controller_.begin_episode(); }
  std::vector<double> act(std::span<const double> observation) override;

 private:
  env::EnvConfig config_;
  env::ScriptedController controller_;
};

/// Uniform actions in [-1, 1]^n.
class RandomPolicy final : public Policy {
 public:
  RandomPolicy(std::size_t action_size, CounterRng& rng) : size_(action_size), rng_(rng) {}
  std::vector<double> act(std::span<const double> observation) override;

 private:
  std::size_t size_;
  CounterRng& rng_;
};

struct EpisodeOutcome {
  int steps = 0;
  double total_reward = 0.0;
  bool reached = false;
  std::vector<double> rewards;

  double average_reward() const { return steps ? total_reward / steps : 0.0; }
};

/// One episode from reset until done.
EpisodeOutcome run_episode(Policy& policy, env::Environment& environment, env::ResetRng rng);

struct FinalEvalResult {
  int episodes = 0;
  int successes = 0;
  int steps = 0;
  double success_rate() const { return episodes ? double(successes) / episodes : 0.0; }
};

/// total_steps / steps_per_episode episodes (leftover steps are not started);
/// an episode succeeds when it reaches the goal.
FinalEvalResult run_final_eval(Policy& policy, env::Environment& environment, env::ResetRng rng,
                               int total_steps);

}  // namespace valvebench::harness
