#include "valvebench/harness/export.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "valvebench/common/archive.hpp"
#include "valvebench/common/errors.hpp"
#include "valvebench/harness/metrics.hpp"

namespace valvebench::harness {

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::size_t columns,
                                               const std::filesystem::path& file) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != columns) {
      throw FormatError(file.string() + ": expected " + std::to_string(columns) + " columns");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string cell(const std::map<agents::Algorithm, double>& row, agents::Algorithm a) {
  const auto it = row.find(a);
  return it == row.end() ? std::string() : format_exact(it->second);
}

const std::vector<agents::Algorithm> kCurveColumns{agents::Algorithm::Ddpg, agents::Algorithm::Td3,
                                                   agents::Algorithm::Sac};

std::string merged_curve(const std::map<agents::Algorithm, const RunRecord*>& runs,
                         bool eval_series, const std::string& tag) {
  std::map<int, std::map<agents::Algorithm, double>> joined;
  for (const auto& [algo, run] : runs) {
    for (const auto& [step, value] : eval_series ? run->eval : run->learning) joined[step][algo] = value;
  }
  std::ostringstream out;
  out << "# " << tag << " v1\n" << (eval_series ? "training_step" : "step");
  for (auto a : kCurveColumns) out << ',' << agents::algorithm_name(a);
  out << '\n';
  for (const auto& [step, row] : joined) {
    out << step;
    for (auto a : kCurveColumns) out << ',' << cell(row, a);
    out << '\n';
  }
  return out.str();
}

}  // namespace

RunRecord read_run(const std::filesystem::path& dir) {
  const std::vector<std::string> needed{"config.txt", "metrics_train.csv", "metrics_eval.csv",
                                        "result.txt"};
  std::vector<std::string> missing;
  for (const auto& f : needed)
    if (!std::filesystem::is_regular_file(dir / f)) missing.push_back(f);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw FormatError("run '" + dir.string() + "' is missing " + list);
  }
  RunRecord r;
  r.dir = dir;
  r.config = parse_config(read_file(dir / "config.txt"));
  for (const auto& row : csv_rows(read_file(dir / "metrics_train.csv"), 5, dir / "metrics_train.csv")) {
    r.learning.emplace_back(static_cast<int>(parse_int(row[0])), parse_double(row[2]));
  }
  for (const auto& row : csv_rows(read_file(dir / "metrics_eval.csv"), 4, dir / "metrics_eval.csv")) {
    r.eval.emplace_back(static_cast<int>(parse_int(row[0])), parse_double(row[2]));
  }
  std::istringstream result(read_file(dir / "result.txt"));
  for (std::string line; std::getline(result, line);) {
    const std::string key = "success_rate = ";
    if (line.rfind(key, 0) == 0 && line.substr(key.size()) != "none") {
      r.success_rate = parse_double(line.substr(key.size()));
    }
  }
  return r;
}

std::vector<std::filesystem::path> find_runs(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(root)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "config.txt")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ExportSummary export_runs(const std::vector<std::filesystem::path>& run_dirs,
                          const std::filesystem::path& out_dir) {
  if (run_dirs.empty()) throw FormatError("export: no run directories given");
  std::vector<RunRecord> runs;
  for (const auto& d : run_dirs) runs.push_back(read_run(d));

  ExportSummary summary;
  std::map<std::pair<env::TaskKind, agents::Algorithm>, const RunRecord*> chosen;
  std::vector<const RunRecord*> ordered;
  for (const auto& r : runs) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const RunRecord* a, const RunRecord* b) { return a->dir < b->dir; });
  for (const RunRecord* r : ordered) {
    auto& slot = chosen[{r->config.task, r->config.algorithm}];
    if (slot) summary.notes.push_back("superseded " + slot->dir.string() + " by " + r->dir.string());
    slot = r;
  }

  std::filesystem::create_directories(out_dir);
  for (auto task : kTableColumns) {
    std::map<agents::Algorithm, const RunRecord*> per_algo;
    for (const auto& [key, run] : chosen)
      if (key.first == task) per_algo[key.second] = run;
    if (per_algo.empty()) continue;
    const std::string name(env::task_name(task));
    const auto learning = out_dir / ("learning_curve_" + name + ".csv");
    const auto eval = out_dir / ("eval_curve_" + name + ".csv");
    write_file_atomic(learning, merged_curve(per_algo, false, "learning_curve"));
    write_file_atomic(eval, merged_curve(per_algo, true, "eval_curve"));
    summary.written.push_back(learning);
    summary.written.push_back(eval);
  }

  std::ostringstream table;
  table << "# success_table v1\nalgorithm";
  for (auto t : kTableColumns) table << ',' << env::task_name(t);
  table << '\n';
  for (auto a : kTableRows) {
    std::string upper(agents::algorithm_name(a));
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    table << upper;
    for (auto t : kTableColumns) {
      const auto it = chosen.find({t, a});
      if (it == chosen.end() || !it->second->success_rate) {
        table << ",-";
      } else {
        std::ostringstream v;
        v.setf(std::ios::fixed);
        v.precision(2);
        v << *it->second->success_rate;
        table << ',' << v.str();
      }
    }
    table << '\n';
  }
  const auto table_path = out_dir / "success_table.csv";
  write_file_atomic(table_path, table.str());
  summary.written.push_back(table_path);
  return summary;
}

}  // namespace valvebench::harness
