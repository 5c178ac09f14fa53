#pragma once

#include <array>

#include "valvebench/env/contact.hpp"
#include "valvebench/env/environment.hpp"
#include "valvebench/env/geometry.hpp"
#include "valvebench/env/reward.hpp"

namespace valvebench::env {

struct EnvConfig {
  FingerGeometry geometry;
  JointLimits limits = JointLimits::defaults();
  ContactParams contact;
  double max_joint_step = 15.0;  // deg per step
  int steps_per_episode = 50;
  TaskSpec task;

  /// Abduction 0, flexions at mid-range.
  JointVector home_pose() const;
  void validate() const;
};

/// Raw 19-value observation: q[0..9), prong tip (x, y) x 4, valve angle, goal angle.
struct Observation {
  std::array<double, kObservationSize> values{};

  static Observation assemble(const JointVector& q, double valve_deg, double goal_deg,
                              double prong_length);
  JointVector joints() const;
  double valve() const { return values[17]; }
  double goal() const { return values[18]; }
};

/// Network view in [-1, 1]: joints scaled by their limits, prong tips by the
/// prong length, the valve angle as angle/180 - 1, and in the last slot the
/// signed rotation still needed to reach the goal, divided by 180.
std::vector<double> normalize(const Observation& obs, const EnvConfig& config);
Observation denormalize(std::span<const double> normalized, const EnvConfig& config);

/// Joint targets for an action: components clamped to [-1, 1] then mapped
/// affinely onto [lo, hi].
JointVector action_to_targets(std::span<const double> action, const JointLimits& limits);
std::array<double, kJointCount> targets_to_action(const JointVector& targets,
                                                  const JointLimits& limits);

/// Slew-limited move of every joint toward its target.
JointVector slew(const JointVector& q, const JointVector& targets, double max_step,
                 const JointLimits& limits);

/// Deterministic surrogate of the three-finger gripper turning a four-prong valve.
class GripperValveEnv final : public Environment {
 public:
  explicit GripperValveEnv(EnvConfig config);

  std::size_t observation_size() const override { return kObservationSize; }
  std::size_t action_size() const override { return kJointCount; }
  int steps_per_episode() const override { return config_.steps_per_episode; }

  std::vector<double> reset(ResetRng rng) override;
  StepResult step(std::span<const double> action) override;

  void save_state(ArchiveWriter& out) const override;
  void load_state(ArchiveReader& in) override;

  /// Starts an episode from an explicit valve angle and goal (tests, demos).
  std::vector<double> reset_to(double valve_deg, double goal_deg);

  const EnvConfig& config() const { return config_; }
  const Observation& observation() const { return observation_; }
  const JointVector& joints() const { return q_; }
  double valve_angle() const { return valve_; }
  double goal_angle() const { return goal_; }
  const ContactState& contacts() const { return contacts_; }
  double last_valve_delta() const { return last_delta_; }
  bool done() const { return done_; }

 private:
  void refresh_observation();

  EnvConfig config_;
  JointVector q_{};
  double valve_ = 0.0;
  double goal_ = 0.0;
  ContactState contacts_;
  double last_delta_ = 0.0;
  int step_index_ = 0;
  bool done_ = true;
  bool started_ = false;
  Observation observation_;
};

}  // namespace valvebench::env
