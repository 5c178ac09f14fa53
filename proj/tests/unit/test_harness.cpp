#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "valvebench/common/errors.hpp"
#include "valvebench/env/toy_env.hpp"
#include "valvebench/harness/export.hpp"
#include "valvebench/harness/rng_set.hpp"
#include "valvebench/harness/trainer.hpp"

using namespace valvebench;
using namespace valvebench::harness;
namespace fs = std::filesystem;

namespace {

TrainConfig toy_config(agents::Algorithm algo = agents::Algorithm::Td3) {
  TrainConfig c;
  c.algorithm = algo;
  c.environment = EnvKind::Toy;
  c.hidden = {16, 16};
  c.batch = 8;
  c.g = 2;
  c.exploration_steps = 60;
  c.training_steps = 300;
  c.eval_every_episodes = 2;
  c.checkpoint_every_episodes = 3;
  c.final_eval_steps = 100;
  c.seed = 5;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::path(VB_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

// Toy env that gives up on a chosen global step.
class FlakyEnv final : public env::Environment {
 public:
  explicit FlakyEnv(int fail_at) : fail_at_(fail_at) {}
  std::size_t observation_size() const override { return 1; }
  std::size_t action_size() const override { return 1; }
  int steps_per_episode() const override { return inner_.steps_per_episode(); }
  std::vector<double> reset(env::ResetRng rng) override { return inner_.reset(rng); }
  env::StepResult step(std::span<const double> action) override {
    if (++calls_ == fail_at_) throw HardwareEscalation("servo 4 needs a manual reboot");
    return inner_.step(action);
  }
  void save_state(ArchiveWriter& out) const override { inner_.save_state(out); }
  void load_state(ArchiveReader& in) override { inner_.load_state(in); }

 private:
  env::ToyAngleEnv inner_;
  int fail_at_;
  int calls_ = 0;
};

}  // namespace

TEST_CASE("config defaults carry the benchmark hyperparameters") {
  TrainConfig c;
  CHECK(c.actor_lr == 1e-4);
  CHECK(c.critic_lr == 1e-3);
  CHECK(c.batch == 32);
  CHECK(c.capacity == 1'000'000);
  CHECK(c.g == 7);
  CHECK(c.seed == 10);
  CHECK(c.steps_per_episode == 50);
  CHECK(c.exploration_steps == 1000);
  CHECK(c.training_steps == 60000);
  CHECK(c.eval_every_episodes == 10);
  CHECK(c.final_eval_steps == 1000);
  CHECK(c.epsilon == 3.0);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config parsing, comments and errors") {
  const auto c = parse_config(
      "# run\nalgorithm = sac\n task=30_330 \n\nbatch = 64  # bigger\nhidden = 32,16\n"
      "target_entropy = -4.5\n");
  CHECK(c.algorithm == agents::Algorithm::Sac);
  CHECK(c.task == env::TaskKind::Range30_330);
  CHECK(c.batch == 64);
  CHECK(c.hidden == std::vector<int>{32, 16});
  CHECK(c.target_entropy == -4.5);
  CHECK(c.g == 7);

  try {
    parse_config("batch = 4\ngee = 7\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("gee") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("batch = many\n"), FormatError);
  CHECK_THROWS_AS(parse_config("batch =\n"), FormatError);
  CHECK_THROWS_AS(parse_config("just words\n"), FormatError);

  TrainConfig bad;
  bad.g = 0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("config echo parses back to the same config") {
  TrainConfig c = toy_config(agents::Algorithm::Sac);
  c.tau = 0.1 + 0.2;
  c.target_entropy = -3.25;
  const auto echo = config_echo(c);
  const auto back = parse_config(echo);
  CHECK(config_echo(back) == echo);
  CHECK(back.tau == c.tau);
}

TEST_CASE("rng streams are independent and serializable") {
  auto a = seed_all(10);
  auto b = seed_all(10);
  CHECK(a == b);
  for (int i = 0; i < 100; ++i) a[Stream::Exploration].next_u64();
  CHECK(a[Stream::BufferSampling] == b[Stream::BufferSampling]);
  CHECK(a[Stream::Exploration].cursor() == 100);
  CHECK(seed_all(11)[Stream::Goal].key() != b[Stream::Goal].key());

  std::stringstream ss;
  ArchiveWriter w(ss);
  a.save(w);
  ArchiveReader r(ss);
  CHECK(RngSet::load(r) == a);
}

TEST_CASE("training protocol counters") {
  auto cfg = toy_config();
  Trainer t(cfg);
  t.train();
  const auto& m = t.metrics();
  CHECK(m.counters.env_steps == 300);
  CHECK(m.counters.exploration_steps == 60);
  CHECK(m.counters.updates == 2 * 240);
  CHECK(m.train.size() == 300);
  for (const auto& row : m.train) {
    CHECK(row.critic_loss.has_value() == (row.step > 60));
  }
  const auto done = t.episodes_completed();
  CHECK(m.counters.eval_episodes == std::uint64_t(done / 2));
  CHECK(m.counters.eval_checksum_checks == m.counters.eval_episodes);
  CHECK(m.evals.size() == m.counters.eval_episodes);
  for (const auto& e : m.evals) CHECK(e.episode % 2 == 0);
  CHECK(t.buffer().size() == 300);

  const auto fin = t.final_evaluation();
  CHECK(fin.episodes == 2);
  CHECK(fin.steps <= 100);
  CHECK(t.metrics().final_eval.has_value());
}

TEST_CASE("td3 actor losses appear only on delayed updates") {
  auto cfg = toy_config();
  cfg.g = 1;
  Trainer t(cfg);
  t.train(70);
  int with_actor = 0;
  for (const auto& row : t.metrics().train) with_actor += row.actor_loss ? 1 : 0;
  CHECK(with_actor == 5);
}

TEST_CASE("same seed gives identical checkpoints; resume reproduces the run") {
  for (auto algo : {agents::Algorithm::Ddpg, agents::Algorithm::Td3, agents::Algorithm::Sac}) {
    const auto cfg = toy_config(algo);
    Trainer full(cfg);
    full.train();
    Trainer again(cfg);
    again.train();
    CHECK(full.checkpoint_text() == again.checkpoint_text());

    Trainer half(cfg);
    half.train(137);  // mid-episode
    std::istringstream in(half.checkpoint_text());
    auto resumed = Trainer::from_checkpoint(in);
    CHECK(resumed.checkpoint_text() == half.checkpoint_text());
    resumed.train();
    CHECK(resumed.checkpoint_text() == full.checkpoint_text());
    CHECK(train_csv(resumed.metrics()) == train_csv(full.metrics()));
  }
}

TEST_CASE("checkpoint sink fires on the configured cadence") {
  auto cfg = toy_config();
  Trainer t(cfg);
  std::vector<int> seen;
  t.set_checkpoint_sink([&](const Trainer& tr) { seen.push_back(tr.episodes_completed()); });
  t.train();
  REQUIRE_FALSE(seen.empty());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == 3 * int(i + 1));
}

TEST_CASE("hardware escalation rolls back the episode and marks it invalid") {
  auto cfg = toy_config();
  cfg.exploration_steps = 300;
  Trainer t(cfg, std::make_unique<FlakyEnv>(75), std::make_unique<env::ToyAngleEnv>());
  CHECK_THROWS_AS(t.train(), HardwareEscalation);
  CHECK(t.metrics().counters.invalid_episodes == 1);
  const auto& last = t.metrics().episodes.back();
  CHECK(t.buffer().size() == std::size_t(last.end_step));
  CHECK(t.env_steps() == 74);

  t.train();
  CHECK(t.env_steps() == 300);
  const auto& rows = t.metrics().train;
  CHECK(rows[74].episode == rows[73].episode + 1);
}

TEST_CASE("metrics csv layouts") {
  RunMetrics m;
  m.train.push_back({1, 1, -1.0, std::nullopt, std::nullopt});
  m.train.push_back({2, 1, 0.5, -0.25, 1.5});
  m.evals.push_back({2, 1, 0.125, true});
  m.episodes.push_back({1, 2, 2, -0.5, false});
  CHECK(train_csv(m) == "# metrics_train v1\nstep,episode,reward,actor_loss,critic_loss\n1,1,-1,,\n2,1,0.5,-0.25,1.5\n");
  CHECK(eval_csv(m).find("training_step,episode,avg_reward,reached\n2,1,0.125,1\n") != std::string::npos);
  CHECK(episodes_csv(m).find("episode,end_step,length,total_reward,reached\n1,2,2,-0.5,0\n") != std::string::npos);

  std::stringstream ss;
  ArchiveWriter w(ss);
  m.final_eval = FinalEvalResult{20, 17, 640};
  m.save(w);
  ArchiveReader r(ss);
  const auto back = RunMetrics::load(r);
  CHECK(train_csv(back) == train_csv(m));
  CHECK(back.final_eval->successes == 17);
  const auto text = result_text(m, "seed = 1\n");
  CHECK(text.find("success_rate = 0.85") != std::string::npos);
  CHECK(text.find("seed = 1") != std::string::npos);
}

TEST_CASE("run directory naming") {
  TrainConfig c;
  c.algorithm = agents::Algorithm::Sac;
  c.task = env::TaskKind::Choice90_180_270;
  c.seed = 3;
  const auto when = std::chrono::sys_days{std::chrono::year{2024} / 5 / 6} + std::chrono::hours{7} +
                    std::chrono::minutes{8} + std::chrono::seconds{9};
  CHECK(run_directory_name(c, when) == "sac_90_180_270_3_20240506-070809");
}

TEST_CASE("run_training writes every artifact and resume_training finishes a run") {
  const auto root = scratch_dir("harness_run");
  auto cfg = toy_config(agents::Algorithm::Ddpg);
  const auto summary = run_training(cfg, root / "a");
  for (const char* f : {"config.txt", "checkpoint.txt", "metrics_train.csv", "metrics_eval.csv",
                        "metrics_episodes.csv", "result.txt", "timing.txt"}) {
    CHECK(fs::exists(root / "a" / f));
  }
  CHECK(summary.metrics.final_eval.has_value());
  CHECK(parse_config(read_file(root / "a" / "config.txt")).algorithm == agents::Algorithm::Ddpg);

  // Interrupted copy: a mid-run checkpoint finished by resume matches.
  fs::create_directories(root / "b");
  Trainer partial(cfg);
  partial.train(150);
  write_file_atomic(root / "b" / "config.txt", config_echo(cfg));
  write_file_atomic(root / "b" / "checkpoint.txt", partial.checkpoint_text());
  resume_training(root / "b");
  for (const char* f : {"metrics_train.csv", "metrics_eval.csv", "metrics_episodes.csv", "result.txt",
                        "checkpoint.txt"}) {
    CHECK(read_file(root / "a" / f) == read_file(root / "b" / f));
  }
}

TEST_CASE("export builds the success table and joined curves") {
  const auto root = scratch_dir("harness_export");
  std::vector<fs::path> dirs;
  for (auto algo : {agents::Algorithm::Ddpg, agents::Algorithm::Td3, agents::Algorithm::Sac}) {
    auto cfg = toy_config(algo);
    cfg.training_steps = 120;
    const auto dir = root / std::string(agents::algorithm_name(algo));
    run_training(cfg, dir);
    dirs.push_back(dir);
  }
  auto cfg = toy_config(agents::Algorithm::Td3);
  cfg.training_steps = 120;
  cfg.task = env::TaskKind::Range30_330;
  run_training(cfg, root / "td3_range");
  dirs.push_back(root / "td3_range");

  const auto out = root / "export";
  export_runs(dirs, out);
  const auto table = read_file(out / "success_table.csv");
  std::istringstream lines(table);
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "# success_table v1");
  CHECK(rows[1] == "algorithm,90,90_180_270,30_330");
  CHECK(rows[2].rfind("TD3,", 0) == 0);
  CHECK(rows[3].rfind("DDPG,", 0) == 0);
  CHECK(rows[4].rfind("SAC,", 0) == 0);
  CHECK(rows[3].substr(rows[3].size() - 4) == ",-,-");
  const auto td3_cells = split_csv(rows[2]);
  REQUIRE(td3_cells.size() == 4);
  CHECK(td3_cells[1] != "-");
  CHECK(td3_cells[2] == "-");
  CHECK(td3_cells[3] != "-");

  const auto curve = read_file(out / "learning_curve_90.csv");
  std::istringstream cl(curve);
  std::string header, columns;
  std::getline(cl, header);
  std::getline(cl, columns);
  CHECK(header == "# learning_curve v1");
  CHECK(columns == "step,ddpg,td3,sac");
  int n = 0;
  for (std::string l; std::getline(cl, l);) ++n;
  CHECK(n == 120);
  CHECK(fs::exists(out / "eval_curve_90.csv"));
  CHECK(fs::exists(out / "learning_curve_30_330.csv"));

  fs::create_directories(root / "broken");
  write_file_atomic(root / "broken" / "config.txt", config_echo(cfg));
  try {
    read_run(root / "broken");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("metrics_train.csv") != std::string::npos);
    CHECK(msg.find("result.txt") != std::string::npos);
  }
  CHECK(find_runs(root).size() == 5);
}

TEST_CASE("scripted policy checkpoints evaluate to full success") {
  TrainConfig cfg;
  std::istringstream in(scripted_checkpoint_text(cfg));
  auto loaded = load_policy_checkpoint(in);
  CHECK(loaded.agent == nullptr);
  env::GripperValveEnv env(cfg.env_config());
  CounterRng v(1, 1), g(1, 2);
  const auto res = run_final_eval(*loaded.policy, env, {v, g}, 500);
  CHECK(res.episodes == 10);
  CHECK(res.successes == 10);
}
