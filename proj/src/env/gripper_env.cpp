#include "valvebench/env/gripper_env.hpp"

#include <algorithm>
#include <string>

#include "valvebench/common/errors.hpp"
#include "valvebench/env/angles.hpp"

namespace valvebench::env {

JointVector EnvConfig::home_pose() const {
  JointVector q{};
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    q[3 * f + 0] = 0.0;
    q[3 * f + 1] = 0.5 * (limits.lo[3 * f + 1] + limits.hi[3 * f + 1]);
    q[3 * f + 2] = 0.5 * (limits.lo[3 * f + 2] + limits.hi[3 * f + 2]);
  }
  return q;
}

void EnvConfig::validate() const {
  require(geometry.base_radius > 0 && geometry.base_height > 0 && geometry.link1 > 0 &&
              geometry.link2 > 0,
          "env config: geometry lengths must be positive");
  require(contact.prong_length > 0 && contact.contact_radius > 0 && contact.contact_height > 0 &&
              contact.hub_radius >= 0,
          "env config: contact parameters must be positive");
  require(contact.max_valve_step > 0 && max_joint_step > 0, "env config: step limits must be positive");
  require(steps_per_episode > 0, "env config: steps_per_episode must be positive");
  require(task.epsilon > 0, "env config: epsilon must be positive");
  for (std::size_t i = 0; i < kJointCount; ++i) {
    require(limits.lo[i] < limits.hi[i], "env config: joint limits must satisfy lo < hi");
    if (i % 3 == 0) require(limits.lo[i] <= 0 && limits.hi[i] >= 0, "env config: abduction range must contain 0");
  }
}

Observation Observation::assemble(const JointVector& q, double valve_deg, double goal_deg,
                                  double prong_length) {
  Observation obs;
  std::copy(q.begin(), q.end(), obs.values.begin());
  const auto tips = valve_tip_positions(valve_deg, prong_length);
  for (std::size_t k = 0; k < kProngCount; ++k) {
    obs.values[kJointCount + 2 * k] = tips[k].x();
    obs.values[kJointCount + 2 * k + 1] = tips[k].y();
  }
  obs.values[17] = valve_deg;
  obs.values[18] = goal_deg;
  return obs;
}

JointVector Observation::joints() const {
  JointVector q{};
  std::copy_n(values.begin(), kJointCount, q.begin());
  return q;
}

std::vector<double> normalize(const Observation& obs, const EnvConfig& config) {
  std::vector<double> out(kObservationSize);
  const auto& lim = config.limits;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    out[i] = 2.0 * (obs.values[i] - lim.lo[i]) / (lim.hi[i] - lim.lo[i]) - 1.0;
  }
  for (std::size_t i = kJointCount; i < kJointCount + 2 * kProngCount; ++i) {
    out[i] = obs.values[i] / config.contact.prong_length;
  }
  out[17] = obs.values[17] / 180.0 - 1.0;
  out[18] = angdiff(obs.values[18], obs.values[17]) / 180.0;
  return out;
}

Observation denormalize(std::span<const double> normalized, const EnvConfig& config) {
  require(normalized.size() == kObservationSize, "denormalize: expected 19 values");
  Observation obs;
  const auto& lim = config.limits;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    obs.values[i] = lim.lo[i] + 0.5 * (normalized[i] + 1.0) * (lim.hi[i] - lim.lo[i]);
  }
  for (std::size_t i = kJointCount; i < kJointCount + 2 * kProngCount; ++i) {
    obs.values[i] = normalized[i] * config.contact.prong_length;
  }
  obs.values[17] = (normalized[17] + 1.0) * 180.0;
  obs.values[18] = wrap360(obs.values[17] + normalized[18] * 180.0);
  return obs;
}

JointVector action_to_targets(std::span<const double> action, const JointLimits& limits) {
  require(action.size() == kJointCount, "action must have 9 components");
  JointVector t{};
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const double a = std::clamp(action[i], -1.0, 1.0);
    t[i] = limits.lo[i] + 0.5 * (a + 1.0) * (limits.hi[i] - limits.lo[i]);
    t[i] = std::clamp(t[i], limits.lo[i], limits.hi[i]);
  }
  return t;
}

std::array<double, kJointCount> targets_to_action(const JointVector& targets,
                                                  const JointLimits& limits) {
  std::array<double, kJointCount> a{};
  for (std::size_t i = 0; i < kJointCount; ++i) {
    a[i] = std::clamp(2.0 * (targets[i] - limits.lo[i]) / (limits.hi[i] - limits.lo[i]) - 1.0,
                      -1.0, 1.0);
  }
  return a;
}

JointVector slew(const JointVector& q, const JointVector& targets, double max_step,
                 const JointLimits& limits) {
  JointVector next{};
  for (std::size_t i = 0; i < kJointCount; ++i) {
    next[i] = q[i] + std::clamp(targets[i] - q[i], -max_step, max_step);
    next[i] = std::clamp(next[i], limits.lo[i], limits.hi[i]);
  }
  return next;
}

GripperValveEnv::GripperValveEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  q_ = config_.home_pose();
}

std::vector<double> GripperValveEnv::reset(ResetRng rng) {
  const double valve = rng.valve.uniform(0.0, 360.0);
  const double offset = sample_goal_offset(config_.task.kind, rng.goal);
  return reset_to(valve, wrap360(valve + offset));
}

std::vector<double> GripperValveEnv::reset_to(double valve_deg, double goal_deg) {
  q_ = config_.home_pose();
  valve_ = wrap360(valve_deg);
  goal_ = wrap360(goal_deg);
  contacts_ = settle_contacts(fingertip_positions(q_, config_.geometry), valve_, config_.contact);
  last_delta_ = 0.0;
  step_index_ = 0;
  done_ = false;
  started_ = true;
  refresh_observation();
  return normalize(observation_, config_);
}

StepResult GripperValveEnv::step(std::span<const double> action) {
  if (!started_) throw ContractViolation("step: environment was never reset");
  if (done_) throw ContractViolation("step: episode already finished; call reset()");
  const auto targets = action_to_targets(action, config_.limits);
  q_ = slew(q_, targets, config_.max_joint_step, config_.limits);

  const double before = valve_;
  const auto tips = fingertip_positions(q_, config_.geometry);
  const auto advance = advance_valve(contacts_, tips, before, config_.contact);
  valve_ = wrap360(before + advance.delta_deg);
  contacts_ = advance.contacts;
  last_delta_ = advance.delta_deg;

  const auto r = compute_reward({before, valve_, goal_, config_.task.epsilon});
  ++step_index_;
  done_ = r.reached || step_index_ >= config_.steps_per_episode;
  refresh_observation();
  return {normalize(observation_, config_), r.reward, done_, r.reached, step_index_};
}

void GripperValveEnv::refresh_observation() {
  observation_ = Observation::assemble(q_, valve_, goal_, config_.contact.prong_length);
}

void GripperValveEnv::save_state(ArchiveWriter& out) const {
  out.values("env_q", q_);
  out.scalar("env_valve", valve_);
  out.scalar("env_goal", goal_);
  out.scalar("env_last_delta", last_delta_);
  std::vector<double> tips;
  for (const auto& t : contacts_.tips) tips.insert(tips.end(), {t.x(), t.y(), t.z()});
  out.values("env_tips", tips);
  out.text("env_engaged", std::to_string(contacts_.engaged[0]) + " " +
                              std::to_string(contacts_.engaged[1]) + " " +
                              std::to_string(contacts_.engaged[2]));
  out.text("env_flags", std::to_string(step_index_) + " " + std::to_string(int(done_)) + " " +
                            std::to_string(int(started_)));
}

void GripperValveEnv::load_state(ArchiveReader& in) {
  in.values_into("env_q", q_);
  valve_ = in.scalar("env_valve");
  goal_ = in.scalar("env_goal");
  last_delta_ = in.scalar("env_last_delta");
  std::array<double, 9> tips{};
  in.values_into("env_tips", tips);
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    contacts_.tips[f] = {tips[3 * f], tips[3 * f + 1], tips[3 * f + 2]};
  }
  const auto engaged = in.record("env_engaged");
  if (engaged.size() != kFingerCount) throw FormatError("checkpoint: malformed env_engaged");
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    contacts_.engaged[f] = static_cast<int>(parse_int(engaged[f]));
  }
  const auto flags = in.record("env_flags");
  if (flags.size() != 3) throw FormatError("checkpoint: malformed env_flags");
  step_index_ = static_cast<int>(parse_int(flags[0]));
  done_ = parse_int(flags[1]) != 0;
  started_ = parse_int(flags[2]) != 0;
  refresh_observation();
}

}  // namespace valvebench::env
