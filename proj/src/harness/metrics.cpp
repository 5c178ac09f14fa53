#include "valvebench/harness/metrics.hpp"

#include <fstream>
#include <sstream>

#include "valvebench/common/errors.hpp"

namespace valvebench::harness {

namespace {

std::string optional_field(const std::optional<double>& v) {
  return v ? format_exact(*v) : std::string("-");
}

std::optional<double> parse_optional(const std::string& s) {
  if (s == "-") return std::nullopt;
  return parse_double(s);
}

int to_int(const std::string& s) { return static_cast<int>(parse_int(s)); }

}  // namespace

void RunMetrics::save(ArchiveWriter& out) const {
  out.unsigned_integer("train_rows", train.size());
  for (const auto& r : train) {
    out.text("r", std::to_string(r.step) + " " + std::to_string(r.episode) + " " +
                      format_exact(r.reward) + " " + optional_field(r.actor_loss) + " " +
                      optional_field(r.critic_loss));
  }
  out.unsigned_integer("episode_rows", episodes.size());
  for (const auto& e : episodes) {
    out.text("e", std::to_string(e.episode) + " " + std::to_string(e.end_step) + " " +
                      std::to_string(e.length) + " " + format_exact(e.total_reward) + " " +
                      (e.reached ? "1" : "0"));
  }
  out.unsigned_integer("eval_rows", evals.size());
  for (const auto& e : evals) {
    out.text("v", std::to_string(e.at_training_step) + " " + std::to_string(e.episode) + " " +
                      format_exact(e.avg_reward) + " " + (e.reached ? "1" : "0"));
  }
  out.text("counters", std::to_string(counters.env_steps) + " " +
                           std::to_string(counters.exploration_steps) + " " +
                           std::to_string(counters.updates) + " " +
                           std::to_string(counters.eval_episodes) + " " +
                           std::to_string(counters.eval_steps) + " " +
                           std::to_string(counters.eval_checksum_checks) + " " +
                           std::to_string(counters.invalid_episodes));
  if (final_eval) {
    out.text("final", std::to_string(final_eval->episodes) + " " +
                          std::to_string(final_eval->successes) + " " +
                          std::to_string(final_eval->steps));
  } else {
    out.text("final", "none");
  }
}

RunMetrics RunMetrics::load(ArchiveReader& in) {
  RunMetrics m;
  auto expect = [](const std::vector<std::string>& f, std::size_t n, const char* tag) {
    if (f.size() != n) throw FormatError(std::string("checkpoint: malformed '") + tag + "' row");
  };
  const auto n_train = in.unsigned_integer("train_rows");
  m.train.reserve(n_train);
  for (std::uint64_t i = 0; i < n_train; ++i) {
    const auto f = in.record("r");
    expect(f, 5, "r");
    m.train.push_back({to_int(f[0]), to_int(f[1]), parse_double(f[2]), parse_optional(f[3]),
                       parse_optional(f[4])});
  }
  const auto n_ep = in.unsigned_integer("episode_rows");
  for (std::uint64_t i = 0; i < n_ep; ++i) {
    const auto f = in.record("e");
    expect(f, 5, "e");
    m.episodes.push_back(
        {to_int(f[0]), to_int(f[1]), to_int(f[2]), parse_double(f[3]), f[4] == "1"});
  }
  const auto n_eval = in.unsigned_integer("eval_rows");
  for (std::uint64_t i = 0; i < n_eval; ++i) {
    const auto f = in.record("v");
    expect(f, 4, "v");
    m.evals.push_back({to_int(f[0]), to_int(f[1]), parse_double(f[2]), f[3] == "1"});
  }
  const auto c = in.record("counters");
  expect(c, 7, "counters");
  m.counters = {parse_uint(c[0]), parse_uint(c[1]), parse_uint(c[2]), parse_uint(c[3]),
                parse_uint(c[4]), parse_uint(c[5]), parse_uint(c[6])};
  const auto f = in.record("final");
  if (!(f.size() == 1 && f[0] == "none")) {
    expect(f, 3, "final");
    m.final_eval = FinalEvalResult{to_int(f[0]), to_int(f[1]), to_int(f[2])};
  }
  return m;
}

std::string train_csv(const RunMetrics& m) {
  std::ostringstream out;
  out << "# metrics_train v1\nstep,episode,reward,actor_loss,critic_loss\n";
  for (const auto& r : m.train) {
    out << r.step << ',' << r.episode << ',' << format_exact(r.reward) << ','
        << (r.actor_loss ? format_exact(*r.actor_loss) : "") << ','
        << (r.critic_loss ? format_exact(*r.critic_loss) : "") << '\n';
  }
  return out.str();
}

std::string eval_csv(const RunMetrics& m) {
  std::ostringstream out;
  out << "# metrics_eval v1\ntraining_step,episode,avg_reward,reached\n";
  for (const auto& e : m.evals) {
    out << e.at_training_step << ',' << e.episode << ',' << format_exact(e.avg_reward) << ','
        << (e.reached ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string episodes_csv(const RunMetrics& m) {
  std::ostringstream out;
  out << "# metrics_episodes v1\nepisode,end_step,length,total_reward,reached\n";
  for (const auto& e : m.episodes) {
    out << e.episode << ',' << e.end_step << ',' << e.length << ',' << format_exact(e.total_reward)
        << ',' << (e.reached ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string result_text(const RunMetrics& m, const std::string& config_echo) {
  std::ostringstream out;
  if (m.final_eval) {
    out << "success_rate = " << format_exact(m.final_eval->success_rate()) << '\n'
        << "successes = " << m.final_eval->successes << '\n'
        << "eval_episodes = " << m.final_eval->episodes << '\n';
  } else {
    out << "success_rate = none\n";
  }
  out << "env_steps = " << m.counters.env_steps << '\n'
      << "exploration_steps = " << m.counters.exploration_steps << '\n'
      << "updates = " << m.counters.updates << '\n'
      << "training_episodes = " << m.episodes.size() << '\n'
      << "periodic_evals = " << m.evals.size() << '\n'
      << "invalid_episodes = " << m.counters.invalid_episodes << '\n'
      << "\n# config\n"
      << config_echo;
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_metrics(const std::filesystem::path& run_dir, const RunMetrics& m,
                   const std::string& config_echo) {
  write_file_atomic(run_dir / "metrics_train.csv", train_csv(m));
  write_file_atomic(run_dir / "metrics_eval.csv", eval_csv(m));
  write_file_atomic(run_dir / "metrics_episodes.csv", episodes_csv(m));
  write_file_atomic(run_dir / "result.txt", result_text(m, config_echo));
}

}  // namespace valvebench::harness
