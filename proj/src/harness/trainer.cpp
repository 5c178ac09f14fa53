#include "valvebench/harness/trainer.hpp"

#include <ctime>
#include <iomanip>
#include <istream>
#include <sstream>

#include "valvebench/common/errors.hpp"
#include "valvebench/env/gripper_env.hpp"
#include "valvebench/env/toy_env.hpp"

namespace valvebench::harness {

std::unique_ptr<env::Environment> make_environment(const TrainConfig& config) {
  if (config.environment == EnvKind::Toy) {
    return std::make_unique<env::ToyAngleEnv>(config.epsilon, config.max_valve_step,
                                              config.steps_per_episode);
  }
  return std::make_unique<env::GripperValveEnv>(config.env_config());
}

namespace {

void write_config(ArchiveWriter& out, const TrainConfig& config) {
  const auto entries = config_entries(config);
  out.unsigned_integer("config", entries.size());
  for (const auto& [k, v] : entries) out.text("cfg", k + " " + v);
}

TrainConfig read_config(ArchiveReader& in) {
  TrainConfig config;
  const auto n = in.unsigned_integer("config");
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto f = in.record("cfg");
    if (f.size() != 2) throw FormatError("checkpoint: malformed config entry");
    set_config_value(config, f[0], f[1]);
  }
  config.validate();
  return config;
}

TrainConfig read_header(ArchiveReader& in) {
  const auto f = in.record(kCheckpointMagic);
  if (f.size() != 1 || parse_int(f[0]) != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version");
  }
  return read_config(in);
}

std::unique_ptr<agents::Agent> build_agent(const TrainConfig& config, const env::Environment& e,
                                           CounterRng& init) {
  return agents::make_agent(config.algorithm,
                            config.agent_config(static_cast<int>(e.observation_size()),
                                                static_cast<int>(e.action_size())),
                            init);
}

}  // namespace

Trainer::Trainer(TrainConfig config)
    : Trainer(config, make_environment(config), make_environment(config)) {}

Trainer::Trainer(TrainConfig config, std::unique_ptr<env::Environment> train_env,
                 std::unique_ptr<env::Environment> eval_env)
    : config_((config.validate(), std::move(config))),
      env_(std::move(train_env)),
      eval_env_(std::move(eval_env)),
      rngs_(seed_all(config_.seed)),
      agent_(build_agent(config_, *env_, rngs_[Stream::NetInit])),
      buffer_(config_.capacity, static_cast<int>(env_->observation_size()),
              static_cast<int>(env_->action_size())) {
  require(eval_env_ != nullptr, "Trainer: eval environment required");
  require(eval_env_->observation_size() == env_->observation_size() &&
              eval_env_->action_size() == env_->action_size(),
          "Trainer: train and eval environments differ in shape");
}

Trainer Trainer::from_checkpoint(std::istream& in, std::unique_ptr<env::Environment> train_env,
                                 std::unique_ptr<env::Environment> eval_env) {
  ArchiveReader reader(in);
  TrainConfig config = read_header(reader);
  if (!train_env) train_env = make_environment(config);
  if (!eval_env) eval_env = make_environment(config);
  Trainer t(config, std::move(train_env), std::move(eval_env));
  t.agent_->load(reader);
  t.rngs_ = RngSet::load(reader);
  const auto progress = reader.record("progress");
  if (progress.size() != 2) throw FormatError("checkpoint: malformed progress record");
  t.needs_reset_ = progress[0] == "1";
  t.episode_steps_ = static_cast<int>(parse_int(progress[1]));
  t.episode_return_ = reader.scalar("episode_return");
  t.observation_ = reader.values("observation");
  t.env_->load_state(reader);
  t.buffer_ = agents::ReplayBuffer::load(reader);
  t.metrics_ = RunMetrics::load(reader);
  reader.record("end");
  return t;
}

void Trainer::save_checkpoint(std::ostream& out) const {
  ArchiveWriter w(out);
  w.integer(kCheckpointMagic, kCheckpointVersion);
  write_config(w, config_);
  agent_->save(w);
  rngs_.save(w);
  w.text("progress", std::string(needs_reset_ ? "1" : "0") + " " + std::to_string(episode_steps_));
  w.scalar("episode_return", episode_return_);
  w.values("observation", observation_);
  env_->save_state(w);
  buffer_.save(w);
  metrics_.save(w);
  w.text("end", "");
}

std::string Trainer::checkpoint_text() const {
  std::ostringstream out;
  save_checkpoint(out);
  return out.str();
}

bool Trainer::training_complete() const { return env_steps() >= config_.training_steps; }

void Trainer::train(std::optional<int> stop_after) {
  while (!training_complete() && (!stop_after || env_steps() < *stop_after)) step_once();
}

void Trainer::step_once() {
  try {
    if (needs_reset_) {
      observation_ = env_->reset({rngs_[Stream::EnvInit], rngs_[Stream::Goal]});
      buffer_.begin_episode();
      episode_steps_ = 0;
      episode_return_ = 0.0;
      needs_reset_ = false;
    }
  } catch (const HardwareEscalation&) {
    ++metrics_.counters.invalid_episodes;
    throw;
  }

  const int step = env_steps() + 1;
  const bool exploring = step <= config_.exploration_steps;
  std::vector<double> action;
  if (exploring) {
    action.resize(env_->action_size());
    for (auto& a : action) a = rngs_[Stream::Exploration].uniform(-1.0, 1.0);
  } else {
    action = agent_->select_action(observation_, agents::ActionMode::Explore,
                                   rngs_[Stream::Exploration]);
  }

  env::StepResult result;
  try {
    result = env_->step(action);
  } catch (const HardwareEscalation&) {
    buffer_.rollback_episode();
    needs_reset_ = true;
    ++metrics_.counters.invalid_episodes;
    throw;
  }

  buffer_.add({observation_, action, result.reward, result.observation, result.reached});
  TrainRow row;
  row.step = step;
  row.episode = episodes_completed() + static_cast<int>(metrics_.counters.invalid_episodes) + 1;
  row.reward = result.reward;
  ++metrics_.counters.env_steps;

  if (exploring) {
    ++metrics_.counters.exploration_steps;
  } else {
    double critic_sum = 0.0, actor_sum = 0.0;
    int actor_n = 0;
    for (int u = 0; u < config_.g; ++u) {
      const auto batch = buffer_.sample(std::size_t(config_.batch), rngs_[Stream::BufferSampling]);
      const auto stats = agent_->update(batch, rngs_[Stream::UpdateNoise]);
      ++metrics_.counters.updates;
      critic_sum += stats.critic_loss;
      if (stats.actor_loss) {
        actor_sum += *stats.actor_loss;
        ++actor_n;
      }
    }
    row.critic_loss = critic_sum / config_.g;
    if (actor_n) row.actor_loss = actor_sum / actor_n;
  }
  metrics_.train.push_back(row);

  observation_ = result.observation;
  ++episode_steps_;
  episode_return_ += result.reward;
  if (result.done) finish_episode(result.reached);
}

void Trainer::finish_episode(bool reached) {
  const int number = episodes_completed() + static_cast<int>(metrics_.counters.invalid_episodes) + 1;
  metrics_.episodes.push_back({number, env_steps(), episode_steps_, episode_return_, reached});
  needs_reset_ = true;
  const int done = episodes_completed();
  if (done % config_.eval_every_episodes == 0) periodic_eval();
  if (sink_ && done % config_.checkpoint_every_episodes == 0) sink_(*this);
}

void Trainer::periodic_eval() {
  const auto before = agent_->parameter_checksum();
  GreedyAgentPolicy policy(*agent_);
  const auto outcome =
      run_episode(policy, *eval_env_, {rngs_[Stream::EvalEnv], rngs_[Stream::EvalGoal]});
  if (agent_->parameter_checksum() != before) {
    throw InvariantViolation("evaluation episode changed agent parameters");
  }
  ++metrics_.counters.eval_checksum_checks;
  ++metrics_.counters.eval_episodes;
  metrics_.counters.eval_steps += std::uint64_t(outcome.steps);
  metrics_.evals.push_back(
      {env_steps(), episodes_completed(), outcome.average_reward(), outcome.reached});
}

FinalEvalResult Trainer::final_evaluation() {
  GreedyAgentPolicy policy(*agent_);
  const auto result = run_final_eval(policy, *eval_env_,
                                     {rngs_[Stream::FinalEnv], rngs_[Stream::FinalGoal]},
                                     config_.final_eval_steps);
  metrics_.final_eval = result;
  return result;
}

LoadedPolicy load_policy_checkpoint(std::istream& in) {
  ArchiveReader reader(in);
  LoadedPolicy out;
  out.config = read_header(reader);
  const std::string kind = reader.text("agent");
  if (kind == "scripted") {
    require(out.config.environment == EnvKind::Gripper,
            "scripted checkpoints only drive the gripper environment");
    out.policy = std::make_unique<ScriptedPolicy>(out.config.env_config());
    return out;
  }
  if (kind != agents::algorithm_name(out.config.algorithm)) {
    throw FormatError("checkpoint: agent '" + kind + "' does not match configured algorithm '" +
                      std::string(agents::algorithm_name(out.config.algorithm)) + "'");
  }
  const auto shape = make_environment(out.config);
  CounterRng scratch;
  out.agent = build_agent(out.config, *shape, scratch);
  out.agent->load_after_header(reader);
  out.policy = std::make_unique<GreedyAgentPolicy>(*out.agent);
  return out;
}

std::string scripted_checkpoint_text(const TrainConfig& config) {
  std::ostringstream s;
  ArchiveWriter w(s);
  w.integer(kCheckpointMagic, kCheckpointVersion);
  write_config(w, config);
  w.text("agent", "scripted");
  w.text("end", "");
  return s.str();
}

std::string run_directory_name(const TrainConfig& config,
                               std::chrono::system_clock::time_point when) {
  const std::time_t t = std::chrono::system_clock::to_time_t(when);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << agents::algorithm_name(config.algorithm) << '_' << env::task_name(config.task) << '_'
    << config.seed << '_' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return s.str();
}

namespace {

RunSummary drive(Trainer& trainer, const std::filesystem::path& run_dir) {
  const auto checkpoint_path = run_dir / "checkpoint.txt";
  const std::string echo = config_echo(trainer.config());
  trainer.set_checkpoint_sink([&](const Trainer& t) {
    write_file_atomic(checkpoint_path, t.checkpoint_text());
    write_metrics(run_dir, t.metrics(), echo);
  });

  const auto start = std::chrono::steady_clock::now();
  try {
    trainer.train();
  } catch (const NumericFault& fault) {
    std::string snapshot;
    try {
      snapshot = trainer.checkpoint_text();
    } catch (const NumericFault&) {
      snapshot = "# parameters not finite; no snapshot\n";
    }
    write_file_atomic(run_dir / "diagnostic.txt",
                      "# numeric fault at step " + std::to_string(trainer.env_steps() + 1) + ": " +
                          fault.what() + "\n" + snapshot);
    write_metrics(run_dir, trainer.metrics(), echo);
    throw;
  } catch (const HardwareEscalation&) {
    write_file_atomic(checkpoint_path, trainer.checkpoint_text());
    write_metrics(run_dir, trainer.metrics(), echo);
    throw;
  }
  if (!trainer.metrics().final_eval) trainer.final_evaluation();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_file_atomic(checkpoint_path, trainer.checkpoint_text());
  write_metrics(run_dir, trainer.metrics(), echo);
  write_file_atomic(run_dir / "timing.txt", "wall_seconds = " + std::to_string(seconds) + "\n");
  return {run_dir, trainer.metrics(), seconds};
}

}  // namespace

RunSummary run_training(const TrainConfig& config, const std::filesystem::path& run_dir) {
  config.validate();
  std::filesystem::create_directories(run_dir);
  write_file_atomic(run_dir / "config.txt", config_echo(config));
  Trainer trainer(config);
  return drive(trainer, run_dir);
}

RunSummary resume_training(const std::filesystem::path& run_dir) {
  std::istringstream in(read_file(run_dir / "checkpoint.txt"));
  Trainer trainer = Trainer::from_checkpoint(in);
  return drive(trainer, run_dir);
}

}  // namespace valvebench::harness
