#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "valvebench/agents/agent.hpp"
#include "valvebench/agents/replay_buffer.hpp"
#include "valvebench/env/environment.hpp"
#include "valvebench/harness/evaluation.hpp"
#include "valvebench/harness/metrics.hpp"
#include "valvebench/harness/rng_set.hpp"
#include "valvebench/harness/train_config.hpp"

namespace valvebench::harness {

inline constexpr std::string_view kCheckpointMagic = "valvebench-checkpoint";
inline constexpr int kCheckpointVersion = 1;

std::unique_ptr<env::Environment> make_environment(const TrainConfig& config);

/// Owns env, agent, buffer and rng streams for one run and steps through the
/// training protocol:
///  - the first exploration_steps steps take uniform actions, no updates;
///  - every later step is followed by G updates on fresh minibatches;
///  - after every eval_every_episodes finished episodes, one greedy episode
///    runs on a separate env instance outside the step budget.
class Trainer {
 public:
  using CheckpointSink = std::function<void(const Trainer&)>;

  explicit Trainer(TrainConfig config);
  /// Runs against caller-supplied environments (e.g. a hardware adapter).
  Trainer(TrainConfig config, std::unique_ptr<env::Environment> train_env,
          std::unique_ptr<env::Environment> eval_env);

  /// Restores a run saved with save_checkpoint(). The environments are built
  /// from the stored config unless supplied.
  static Trainer from_checkpoint(std::istream& in,
                                 std::unique_ptr<env::Environment> train_env = nullptr,
                                 std::unique_ptr<env::Environment> eval_env = nullptr);

  /// Steps until the budget is spent or env_steps() reaches stop_after.
  /// NumericFault and ContractViolation propagate. A HardwareEscalation
  /// mid-episode first rolls back that episode's buffer writes.
  void train(std::optional<int> stop_after = std::nullopt);
  bool training_complete() const;

  /// Greedy evaluation over final_eval_steps; stored in metrics().
  FinalEvalResult final_evaluation();

  void save_checkpoint(std::ostream& out) const;
  std::string checkpoint_text() const;

  /// Called every checkpoint_every_episodes finished episodes.
  void set_checkpoint_sink(CheckpointSink sink) { sink_ = std::move(sink); }

  const TrainConfig& config() const { return config_; }
  const RunMetrics& metrics() const { return metrics_; }
  const agents::Agent& agent() const { return *agent_; }
  agents::Agent& agent() { return *agent_; }
  const agents::ReplayBuffer& buffer() const { return buffer_; }
  const RngSet& rngs() const { return rngs_; }
  int env_steps() const { return static_cast<int>(metrics_.counters.env_steps); }
  int episodes_completed() const { return static_cast<int>(metrics_.episodes.size()); }

 private:
  Trainer(TrainConfig config, std::unique_ptr<env::Environment> train_env,
          std::unique_ptr<env::Environment> eval_env, bool init_agent);

  void step_once();
  void finish_episode(bool reached);
  void periodic_eval();

  TrainConfig config_;
  std::unique_ptr<env::Environment> env_;
  std::unique_ptr<env::Environment> eval_env_;
  RngSet rngs_;
  std::unique_ptr<agents::Agent> agent_;
  agents::ReplayBuffer buffer_;
  RunMetrics metrics_;

  std::vector<double> observation_;
  bool needs_reset_ = true;
  int episode_steps_ = 0;
  double episode_return_ = 0.0;

  CheckpointSink sink_;
};

/// Policy restored from a checkpoint: a greedy agent, or the scripted
/// controller for `agent scripted` checkpoints.
struct LoadedPolicy {
  TrainConfig config;
  std::unique_ptr<agents::Agent> agent;  // null for scripted
  std::unique_ptr<Policy> policy;
};
LoadedPolicy load_policy_checkpoint(std::istream& in);
/// Checkpoint that evaluates with the scripted controller.
std::string scripted_checkpoint_text(const TrainConfig& config);

/// `<algo>_<task>_<seed>_<YYYYmmdd-HHMMSS>`
std::string run_directory_name(const TrainConfig& config,
                               std::chrono::system_clock::time_point when);

struct RunSummary {
  std::filesystem::path run_dir;
  RunMetrics metrics;
  double wall_seconds = 0.0;
};

/// Full run in `run_dir`: config.txt echo, rolling checkpoint.txt, metrics
/// CSVs, result.txt and timing.txt. A NumericFault writes diagnostic.txt and
/// the metrics so far before propagating; a HardwareEscalation writes the
/// checkpoint before propagating.
RunSummary run_training(const TrainConfig& config, const std::filesystem::path& run_dir);
/// Continues the run whose checkpoint.txt lives in `run_dir`.
RunSummary resume_training(const std::filesystem::path& run_dir);

}  // namespace valvebench::harness
