#include "valvebench/harness/evaluation.hpp"

#include "valvebench/common/errors.hpp"

namespace valvebench::harness {

std::vector<double> GreedyAgentPolicy::act(std::span<const double> observation) {
  CounterRng unused;  // greedy selection draws nothing
  return agent_.select_action(observation, agents::ActionMode::Greedy, unused);
}

ScriptedPolicy::ScriptedPolicy(env::EnvConfig config)
    : config_(config), controller_(std::move(config)) {}

std::vector<double> ScriptedPolicy::act(std::span<const double> observation) {
  const auto a = controller_.act(env::denormalize(observation, config_));
  return {a.begin(), a.end()};
}

std::vector<double> RandomPolicy::act(std::span<const double>) {
  std::vector<double> a(size_);
  for (auto& v : a) v = rng_.uniform(-1.0, 1.0);
  return a;
}

EpisodeOutcome run_episode(Policy& policy, env::Environment& environment, env::ResetRng rng) {
  EpisodeOutcome out;
  std::vector<double> obs = environment.reset(rng);
  policy.begin_episode();
  for (;;) {
    const auto result = environment.step(policy.act(obs));
    ++out.steps;
    out.total_reward += result.reward;
    out.rewards.push_back(result.reward);
    out.reached = out.reached || result.reached;
    obs = result.observation;
    if (result.done) break;
  }
  return out;
}

FinalEvalResult run_final_eval(Policy& policy, env::Environment& environment, env::ResetRng rng,
                               int total_steps) {
  require(total_steps >= 0, "run_final_eval: total_steps must be non-negative");
  FinalEvalResult result;
  result.episodes = total_steps / environment.steps_per_episode();
  for (int e = 0; e < result.episodes; ++e) {
    const auto outcome = run_episode(policy, environment, rng);
    result.steps += outcome.steps;
    if (outcome.reached) ++result.successes;
  }
  return result;
}

}  // namespace valvebench::harness
