#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "valvebench/common/errors.hpp"
#include "valvebench/devicebus/mock_bus.hpp"
#include "valvebench/devicebus/serial_transport.hpp"
#include "valvebench/devicebus/supervisor.hpp"
#include "valvebench/env/gripper_env.hpp"
#include "valvebench/harness/evaluation.hpp"
#include "valvebench/harness/export.hpp"
#include "valvebench/harness/metrics.hpp"
#include "valvebench/harness/trainer.hpp"

namespace valvebench::cli {

namespace fs = std::filesystem;
using harness::TrainConfig;

namespace {

/// Raised for bad user input that survives CLI11 parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

TrainConfig load_train_config(const Globals& g, const std::vector<std::string>& sets) {
  try {
    TrainConfig c = g.config.empty() ? TrainConfig{} : harness::load_config_file(g.config);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw FormatError("--set expects key=value, got '" + s + "'");
      auto trim = [](std::string v) {
        v.erase(0, v.find_first_not_of(' '));
        v.erase(v.find_last_not_of(' ') + 1);
        return v;
      };
      harness::set_config_value(c, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    if (g.seed) c.seed = *g.seed;
    if (!g.out.empty()) c.output_dir = g.out;
    c.validate();
    return c;
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
}

std::string fixed2(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

int cmd_train(const Globals& g, const std::vector<std::string>& sets, const std::string& resume,
              std::ostream& out) {
  harness::RunSummary summary;
  if (!resume.empty()) {
    summary = harness::resume_training(resume);
  } else {
    const TrainConfig c = load_train_config(g, sets);
    const fs::path dir =
        fs::path(c.output_dir) / harness::run_directory_name(c, std::chrono::system_clock::now());
    out << "run directory " << dir.string() << "\n";
    summary = harness::run_training(c, dir);
  }
  const auto& m = summary.metrics;
  out << "env_steps " << m.counters.env_steps << ", updates " << m.counters.updates
      << ", episodes " << m.episodes.size() << ", evals " << m.evals.size() << "\n";
  if (m.final_eval) {
    out << "success_rate " << fixed2(m.final_eval->success_rate()) << " ("
        << m.final_eval->successes << "/" << m.final_eval->episodes << " episodes)\n";
  }
  return kOk;
}

int cmd_eval(const Globals& g, const std::string& checkpoint, const std::string& task, int steps,
             std::ostream& out) {
  if (steps <= 0) throw UsageError("--steps must be positive");
  std::istringstream in(harness::read_file(checkpoint));
  auto loaded = harness::load_policy_checkpoint(in);
  TrainConfig c = loaded.config;
  if (!task.empty()) {
    try {
      c.task = env::task_from_string(task);
    } catch (const FormatError& e) {
      throw UsageError(e.what());
    }
  }
  if (g.seed) c.seed = *g.seed;
  if (loaded.agent == nullptr) loaded.policy = std::make_unique<harness::ScriptedPolicy>(c.env_config());

  auto environment = harness::make_environment(c);
  auto rngs = harness::seed_all(c.seed);
  const int episodes = steps / environment->steps_per_episode();
  std::ostringstream csv;
  csv << "# eval v1\nepisode,steps,total_reward,reached\n";
  int successes = 0;
  for (int e = 1; e <= episodes; ++e) {
    const auto o = harness::run_episode(
        *loaded.policy, *environment,
        {rngs[harness::Stream::FinalEnv], rngs[harness::Stream::FinalGoal]});
    successes += o.reached ? 1 : 0;
    csv << e << ',' << o.steps << ',' << format_exact(o.total_reward) << ',' << (o.reached ? 1 : 0)
        << '\n';
  }
  const fs::path dir = g.out.empty() ? fs::path(checkpoint).parent_path() : fs::path(g.out);
  if (!dir.empty()) fs::create_directories(dir);
  const fs::path file = dir / ("eval_" + std::string(env::task_name(c.task)) + ".csv");
  harness::write_file_atomic(file, csv.str());
  const double rate = episodes ? double(successes) / episodes : 0.0;
  out << "success_rate " << fixed2(rate) << " (" << successes << "/" << episodes
      << " episodes, task " << env::task_name(c.task) << ")\n"
      << "wrote " << file.string() << "\n";
  return kOk;
}

int cmd_export(const Globals& g, const std::vector<std::string>& dirs, std::ostream& out) {
  if (dirs.empty()) throw UsageError("export needs at least one run directory");
  std::vector<fs::path> runs;
  for (const auto& d : dirs) {
    if (fs::exists(fs::path(d) / "config.txt")) {
      runs.emplace_back(d);
      continue;
    }
    const auto found = harness::find_runs(d);
    if (found.empty()) {
      runs.emplace_back(d);  // read_run reports the missing files
    } else {
      runs.insert(runs.end(), found.begin(), found.end());
    }
  }
  const auto summary = harness::export_runs(runs, g.out.empty() ? fs::path("export") : fs::path(g.out));
  for (const auto& n : summary.notes) out << "note: " << n << "\n";
  for (const auto& f : summary.written) out << "wrote " << f.string() << "\n";
  return kOk;
}

int cmd_env_demo(const Globals& g, const std::string& task, const std::string& policy_name,
                 const std::string& save_policy, std::ostream& out) {
  TrainConfig c = load_train_config(g, {});
  try {
    c.task = env::task_from_string(task);
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
  if (c.environment != harness::EnvKind::Gripper) throw UsageError("env-demo drives the gripper environment");
  auto rngs = harness::seed_all(c.seed);
  std::unique_ptr<harness::Policy> policy;
  if (policy_name == "scripted") {
    policy = std::make_unique<harness::ScriptedPolicy>(c.env_config());
  } else if (policy_name == "random") {
    policy = std::make_unique<harness::RandomPolicy>(env::kJointCount, rngs[harness::Stream::Exploration]);
  } else {
    throw UsageError("--policy must be scripted or random");
  }

  env::GripperValveEnv environment(c.env_config());
  auto obs = environment.reset({rngs[harness::Stream::EnvInit], rngs[harness::Stream::Goal]});
  policy->begin_episode();
  std::ostringstream csv;
  csv << "# env_demo v1\nstep";
  for (int j = 0; j < env::kJointCount; ++j) csv << ",q" << j;
  csv << ",valve,goal,reward,reached\n";
  bool reached = false;
  int steps = 0;
  for (bool done = false; !done;) {
    const auto r = environment.step(policy->act(obs));
    obs = r.observation;
    done = r.done;
    reached = reached || r.reached;
    ++steps;
    csv << r.step_index;
    for (double q : environment.joints()) csv << ',' << format_exact(q);
    csv << ',' << format_exact(environment.valve_angle()) << ',' << format_exact(environment.goal_angle())
        << ',' << format_exact(r.reward) << ',' << (r.reached ? 1 : 0) << '\n';
  }
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  const fs::path file = dir / ("env_demo_" + policy_name + "_" + std::string(env::task_name(c.task)) +
                               "_" + std::to_string(c.seed) + ".csv");
  harness::write_file_atomic(file, csv.str());
  if (!save_policy.empty()) {
    if (policy_name != "scripted") throw UsageError("--save-policy needs --policy scripted");
    harness::write_file_atomic(save_policy, harness::scripted_checkpoint_text(c));
    out << "wrote policy checkpoint " << save_policy << "\n";
  }
  out << "reached " << (reached ? "true" : "false") << " after " << steps << " steps\n"
      << "wrote " << file.string() << "\n";
  return kOk;
}

int cmd_bus_check(const std::string& fault_script, bool supervised,
                  const std::vector<std::string>& ports, int timeout_ms, std::ostream& out) {
  using namespace devicebus;
  VirtualClock virtual_clock;
  SteadyClock steady_clock;
  std::unique_ptr<Transport> transport;
  Clock* clock = nullptr;
  if (ports.empty()) {
    auto mock = std::make_unique<MockBus>(MockBus::gripper(virtual_clock));
    if (!fault_script.empty()) {
      try {
        mock->set_fault_script(FaultScript::load_file(fault_script));
      } catch (const FormatError& e) {
        throw UsageError(e.what());
      }
    }
    transport = std::move(mock);
    clock = &virtual_clock;
  } else {
    if (!fault_script.empty()) throw UsageError("--fault-script applies to the mock bus only");
    std::map<int, std::string> map;
    for (const auto& p : ports) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) throw UsageError("--port expects chain=path, got '" + p + "'");
      try {
        map[static_cast<int>(parse_int(p.substr(0, eq)))] = p.substr(eq + 1);
      } catch (const FormatError& e) {
        throw UsageError(e.what());
      }
    }
    transport = std::make_unique<SerialTransport>(map);
    clock = &steady_clock;
  }
  ServoBus bus(*transport, *clock, BusLayout::gripper(), Micros{timeout_ms * 1000});
  Supervisor supervisor(bus);

  out << "id  chain  model  firmware  status    rtt_us\n";
  int missing = 0;
  bool escalated = false;
  for (const auto id : bus.layout().all_ids()) {
    std::optional<PingInfo> info;
    std::string status = "OK";
    try {
      info = supervised ? supervisor.call(id, [&] { return bus.ping(id); }) : bus.ping(id);
    } catch (const ManualInterventionRequired&) {
      escalated = true;
      status = "ESCALATED";
    } catch (const BusError& e) {
      status = e.kind() == BusErrorKind::Timeout ? "MISSING" : "ERROR";
    }
    if (!info) ++missing;
    out << std::left << std::setw(4) << int(id) << std::setw(7) << bus.layout().chain(id);
    if (info) {
      out << std::setw(7) << info->model << std::setw(10) << int(info->firmware) << std::setw(10)
          << status << info->round_trip.count() << "\n";
    } else {
      out << std::setw(7) << "-" << std::setw(10) << "-" << std::setw(10) << status << "-\n";
    }
  }
  out << std::right;
  if (supervised) out << "reboots " << supervisor.total_reboots() << "\n";
  out << (missing ? std::to_string(missing) + " of " + std::to_string(bus.layout().all_ids().size()) +
                        " devices not responding\n"
                  : std::string("all devices responding\n"));
  if (escalated) return kEscalation;
  return missing ? kRuntime : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dexterous valve-turning benchmark: training, evaluation and bus tools", "valvebench"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed (overrides the config)");
  app.add_option("--config", g.config, "Run configuration file (key = value)");
  app.add_option("--out", g.out, "Output directory");

  auto* train = app.add_subcommand("train", "Train an agent and write a run directory");
  std::vector<std::string> sets;
  std::string resume;
  train->add_option("--set", sets, "Override one config key (key=value)");
  train->add_option("--resume", resume, "Continue the run in this directory from its checkpoint");

  auto* eval = app.add_subcommand("eval", "Greedy success rate of a checkpoint");
  std::string checkpoint, eval_task;
  int eval_steps = 1000;
  eval->add_option("checkpoint", checkpoint, "checkpoint.txt of a run")->required();
  eval->add_option("--task", eval_task, "Task override: 90, 90_180_270, 30_330");
  eval->add_option("--steps", eval_steps, "Evaluation budget in steps")->capture_default_str();

  auto* exp = app.add_subcommand("export", "Figure-ready CSVs and the success table");
  std::vector<std::string> run_dirs;
  exp->add_option("runs", run_dirs, "Run directories, or directories holding runs")->required();

  auto* demo = app.add_subcommand("env-demo", "One episode with a scripted or random policy");
  std::string demo_task = "90", demo_policy = "scripted", save_policy;
  demo->add_option("--task", demo_task, "Task: 90, 90_180_270, 30_330")->capture_default_str();
  demo->add_option("--policy", demo_policy, "scripted or random")->capture_default_str();
  demo->add_option("--save-policy", save_policy, "Also write a checkpoint that evaluates the scripted policy");

  auto* bus = app.add_subcommand("bus-check", "Ping every configured device");
  std::string fault_script;
  bool supervised = false;
  std::vector<std::string> ports;
  int timeout_ms = 50;
  bus->add_option("--fault-script", fault_script, "Fault rules for the mock bus");
  bus->add_flag("--supervised", supervised, "Retry and reboot through the supervisor");
  bus->add_option("--port", ports, "chain=serial-device; uses real ports instead of the mock");
  bus->add_option("--timeout-ms", timeout_ms, "Per-transaction timeout")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }
  if (seed_opt->count()) g.seed = seed_value;

  try {
    if (*train) return cmd_train(g, sets, resume, out);
    if (*eval) return cmd_eval(g, checkpoint, eval_task, eval_steps, out);
    if (*exp) return cmd_export(g, run_dirs, out);
    if (*demo) return cmd_env_demo(g, demo_task, demo_policy, save_policy, out);
    if (*bus) return cmd_bus_check(fault_script, supervised, ports, timeout_ms, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const HardwareEscalation& e) {
    err << "hardware escalation: " << e.what() << "\n";
    return kEscalation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace valvebench::cli
