#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "valvebench/harness/metrics.hpp"

using namespace valvebench;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(VB_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"fly"}).code == cli::kUsage);
  CHECK(invoke({"train", "--set", "nonsense"}).code == cli::kUsage);
  const auto dir = scratch("cli_usage");
  write(dir / "bad.cfg", "gee = 7\n");
  const auto r = invoke({"train", "--config", (dir / "bad.cfg").string()});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("unknown key 'gee'") != std::string::npos);
}

TEST_CASE("env-demo with the scripted policy reaches the goal") {
  const auto dir = scratch("cli_demo");
  const auto r = invoke({"env-demo", "--seed", "4", "--out", dir.string(), "--save-policy",
                      (dir / "scripted.txt").string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("reached true") != std::string::npos);
  const auto csv = harness::read_file(dir / "env_demo_scripted_90_4.csv");
  CHECK(csv.find("step,q0,q1,q2,q3,q4,q5,q6,q7,q8,valve,goal,reward,reached") != std::string::npos);

  const auto e = invoke({"eval", (dir / "scripted.txt").string(), "--steps", "200"});
  CHECK(e.code == cli::kOk);
  CHECK(e.out.find("success_rate 1.00 (4/4 episodes, task 90)") != std::string::npos);
  CHECK(fs::exists(dir / "eval_90.csv"));

  CHECK(invoke({"eval", (dir / "missing.txt").string()}).code == cli::kRuntime);
}

TEST_CASE("train, resume and export through the command line") {
  const auto dir = scratch("cli_train");
  const std::vector<std::string> common{"--set", "environment=toy", "--set", "hidden=8,8",
                                        "--set", "training_steps=150", "--set", "exploration_steps=50",
                                        "--set", "batch=8", "--set", "g=1", "--set", "final_eval_steps=100"};
  for (const char* algo : {"ddpg", "td3", "sac"}) {
    std::vector<std::string> args{"train", "--seed", "3", "--out", dir.string(), "--set",
                                  std::string("algorithm=") + algo};
    args.insert(args.end(), common.begin(), common.end());
    const auto r = invoke(args);
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("success_rate") != std::string::npos);
  }
  std::vector<fs::path> runs;
  for (const auto& e : fs::directory_iterator(dir)) runs.push_back(e.path());
  REQUIRE(runs.size() == 3);

  CHECK(invoke({"train", "--resume", runs[0].string()}).code == cli::kOk);

  const auto out = dir.parent_path() / "cli_export";
  fs::remove_all(out);
  std::vector<std::string> args{"export"};
  for (const auto& p : runs) args.push_back(p.string());
  args.insert(args.end(), {"--out", out.string()});
  CHECK(invoke(args).code == cli::kOk);
  CHECK(fs::exists(out / "success_table.csv"));
  CHECK(fs::exists(out / "learning_curve_90.csv"));

  CHECK(invoke({"export", (dir / "nope").string(), "--out", out.string()}).code == cli::kRuntime);
}

TEST_CASE("bus-check exit codes follow the bus state") {
  const auto dir = scratch("cli_bus");
  auto r = invoke({"bus-check"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("all devices responding") != std::string::npos);

  write(dir / "drop.txt", "id 4 drop_response\n");
  r = invoke({"bus-check", "--fault-script", (dir / "drop.txt").string()});
  CHECK(r.code == cli::kRuntime);
  CHECK(r.out.find("MISSING") != std::string::npos);

  r = invoke({"bus-check", "--fault-script", (dir / "drop.txt").string(), "--supervised"});
  CHECK(r.code == cli::kEscalation);
  CHECK(r.out.find("ESCALATED") != std::string::npos);
  CHECK(r.out.find("reboots 3") != std::string::npos);

  write(dir / "recover.txt", "id 4 recover_after_reboot\n");
  r = invoke({"bus-check", "--fault-script", (dir / "recover.txt").string(), "--supervised"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("reboots 1") != std::string::npos);

  write(dir / "bad.txt", "id 4 explode\n");
  CHECK(invoke({"bus-check", "--fault-script", (dir / "bad.txt").string()}).code == cli::kUsage);
}
