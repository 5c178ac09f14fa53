#include "valvebench/devicebus/hardware_env.hpp"

#include <algorithm>

#include "valvebench/env/angles.hpp"
#include "valvebench/env/reward.hpp"

namespace valvebench::devicebus {

HardwareValveEnv::HardwareValveEnv(Supervisor& supervisor, HardwareEnvConfig config)
    : sup_(supervisor), config_(std::move(config)) {
  config_.env.validate();
}

template <class F>
auto HardwareValveEnv::guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ManualInterventionRequired&) {
    invalid_ = true;
    done_ = true;
    throw;
  }
}

void HardwareValveEnv::command(const env::JointVector& joint_goals) {
  auto& bus = sup_.bus();
  std::array<double, 9> servo{};
  for (std::size_t j = 0; j < servo.size(); ++j) servo[j] = joint_goals[j] + config_.joint_offset_deg;
  const auto report = bus.sync_write_goals(servo);
  for (const auto id : report.failed_ids) {
    const auto& ids = bus.layout().joint_ids;
    const auto j = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
    sup_.call(id, [&] { bus.write_goal(id, servo[j]); });
  }
}

void HardwareValveEnv::poll() {
  auto& bus = sup_.bus();
  for (std::size_t j = 0; j < q_.size(); ++j) {
    const auto id = bus.layout().joint_ids[j];
    q_[j] = sup_.call(id, [&] { return bus.read_position(id); }) - config_.joint_offset_deg;
  }
  const auto enc = bus.layout().valve_encoder_id;
  valve_ = sup_.call(enc, [&] { return bus.read_position(enc); });
}

std::vector<double> HardwareValveEnv::reset(env::ResetRng rng) {
  invalid_ = false;
  guarded([&] {
    auto& bus = sup_.bus();
    for (const auto id : bus.layout().joint_ids) sup_.call(id, [&] { bus.set_torque(id, true); });
    command(config_.env.home_pose());
    bus.clock().sleep(config_.reset_settle);
    poll();
  });
  goal_ = env::wrap360(valve_ + env::sample_goal_offset(config_.env.task.kind, rng.goal));
  step_index_ = 0;
  done_ = false;
  started_ = true;
  return env::normalize(env::Observation::assemble(q_, valve_, goal_, config_.env.contact.prong_length),
                        config_.env);
}

env::StepResult HardwareValveEnv::step(std::span<const double> action) {
  if (!started_) throw ContractViolation("step: environment was never reset");
  if (done_) throw ContractViolation("step: episode already finished; call reset()");
  const auto targets = env::action_to_targets(action, config_.env.limits);
  const auto goals = env::slew(q_, targets, config_.env.max_joint_step, config_.env.limits);
  const double before = valve_;
  guarded([&] {
    command(goals);
    sup_.bus().clock().sleep(config_.step_period);
    poll();
  });
  const auto r = env::compute_reward({before, valve_, goal_, config_.env.task.epsilon});
  ++step_index_;
  done_ = r.reached || step_index_ >= config_.env.steps_per_episode;
  const auto obs = env::Observation::assemble(q_, valve_, goal_, config_.env.contact.prong_length);
  return {env::normalize(obs, config_.env), r.reward, done_, r.reached, step_index_};
}

void HardwareValveEnv::save_state(ArchiveWriter& out) const {
  out.values("hw_q", q_);
  out.scalar("hw_valve", valve_);
  out.scalar("hw_goal", goal_);
  out.text("hw_flags", std::to_string(step_index_) + " " + std::to_string(int(done_)) + " " +
                           std::to_string(int(started_)) + " " + std::to_string(int(invalid_)));
}

void HardwareValveEnv::load_state(ArchiveReader& in) {
  in.values_into("hw_q", q_);
  valve_ = in.scalar("hw_valve");
  goal_ = in.scalar("hw_goal");
  const auto f = in.record("hw_flags");
  if (f.size() != 4) throw FormatError("checkpoint: malformed hw_flags");
  step_index_ = static_cast<int>(parse_int(f[0]));
  done_ = f[1] == "1";
  started_ = f[2] == "1";
  invalid_ = f[3] == "1";
}

}  // namespace valvebench::devicebus
