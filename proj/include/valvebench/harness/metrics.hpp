#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "valvebench/common/archive.hpp"
#include "valvebench/harness/evaluation.hpp"

namespace valvebench::harness {

struct TrainRow {
  int step = 0;     // 1-based environment step
  int episode = 0;  // 1-based training episode the step belongs to
  double reward = 0.0;
  std::optional<double> actor_loss;   // mean over the step's updates that moved the actor
  std::optional<double> critic_loss;  // mean over the step's updates
};

struct EvalRecord {
  int at_training_step = 0;
  int episode = 0;  // completed training episodes when the eval ran
  double avg_reward = 0.0;
  bool reached = false;
};

struct EpisodeRecord {
  int episode = 0;
  int end_step = 0;
  int length = 0;
  double total_reward = 0.0;
  bool reached = false;
};

struct RunCounters {
  std::uint64_t env_steps = 0;
  std::uint64_t exploration_steps = 0;  // steps taken with uniform actions and no updates
  std::uint64_t updates = 0;
  std::uint64_t eval_episodes = 0;
  std::uint64_t eval_steps = 0;
  std::uint64_t eval_checksum_checks = 0;
  std::uint64_t invalid_episodes = 0;  // dropped after a hardware escalation
  friend bool operator==(const RunCounters&, const RunCounters&) = default;
};

struct RunMetrics {
  std::vector<TrainRow> train;
  std::vector<EpisodeRecord> episodes;
  std::vector<EvalRecord> evals;
  RunCounters counters;
  std::optional<FinalEvalResult> final_eval;

  void save(ArchiveWriter& out) const;
  static RunMetrics load(ArchiveReader& in);
};

std::string train_csv(const RunMetrics& m);
std::string eval_csv(const RunMetrics& m);
std::string episodes_csv(const RunMetrics& m);
/// Final success rate, tallies and counters, then the config echo. No wall-clock data.
std::string result_text(const RunMetrics& m, const std::string& config_echo);

/// Writes metrics_train.csv, metrics_eval.csv, metrics_episodes.csv and result.txt.
void write_metrics(const std::filesystem::path& run_dir, const RunMetrics& m,
                   const std::string& config_echo);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace valvebench::harness
