#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valvebench/harness/train_config.hpp"

namespace valvebench::harness {

/// What export needs from one run directory.
struct RunRecord {
  std::filesystem::path dir;
  TrainConfig config;
  std::vector<std::pair<int, double>> learning;  // (step, reward)
  std::vector<std::pair<int, double>> eval;      // (training_step, avg_reward)
  std::optional<double> success_rate;
};

/// Reads config.txt, metrics_train.csv, metrics_eval.csv and result.txt.
/// Throws FormatError listing every missing file.
RunRecord read_run(const std::filesystem::path& dir);

/// Row order and column order of the success table.
inline const std::vector<agents::Algorithm> kTableRows{agents::Algorithm::Td3, agents::Algorithm::Ddpg,
                                                       agents::Algorithm::Sac};
inline const std::vector<env::TaskKind> kTableColumns{
    env::TaskKind::Fixed90, env::TaskKind::Choice90_180_270, env::TaskKind::Range30_330};

struct ExportSummary {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> notes;  // e.g. duplicate runs skipped
};

/// Per task with data: learning_curve_<task>.csv and eval_curve_<task>.csv,
/// outer-joined on step with one column per algorithm (ddpg, td3, sac).
/// Always: success_table.csv, algorithms x tasks, `-` where no run exists.
/// When several runs share an (algorithm, task), the lexically last directory wins.
ExportSummary export_runs(const std::vector<std::filesystem::path>& run_dirs,
                          const std::filesystem::path& out_dir);

/// Run directories directly under `root` (those holding config.txt), sorted.
std::vector<std::filesystem::path> find_runs(const std::filesystem::path& root);

}  // namespace valvebench::harness
