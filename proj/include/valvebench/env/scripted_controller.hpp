#pragma once

#include <array>
#include <optional>

#include "valvebench/env/gripper_env.hpp"

namespace valvebench::env {

/// Joint angles (abduction, flex1, flex2) that put finger `finger`'s tip at
/// `tip`, or nullopt when the point is outside the finger's limits.
std::optional<std::array<double, 3>> finger_ik(std::size_t finger, const Eigen::Vector3d& tip,
                                               const FingerGeometry& geom,
                                               const JointLimits& limits);

/// Hand-written oracle: one finger at a time hovers over a reachable prong,
/// drops onto it, sweeps it about the valve axis toward the goal, lifts and
/// repeats. Works only from the raw observation plus the env geometry.
class ScriptedController {
 public:
  explicit ScriptedController(EnvConfig config);

  void begin_episode();
  std::array<double, kJointCount> act(const Observation& obs);

 private:
  enum class Phase { Choose, Hover, Descend, Sweep, Lift };

  struct Grip {
    std::size_t finger = 0;
    double start_deg = 0.0;  // polar angle of the grip point
    double end_deg = 0.0;    // furthest polar angle the finger can carry the prong to
  };

  std::optional<Grip> choose_grip(double valve_deg, double direction) const;
  bool reachable(std::size_t finger, double polar_deg, double z) const;
  Eigen::Vector3d grip_point(double polar_deg, double z) const;
  /// Moves the working finger's targets toward `goal` along a straight line,
  /// as far as the per-step joint limit allows. Returns true on arrival.
  bool approach(JointVector& targets, const JointVector& q, const Eigen::Vector3d& goal) const;

  EnvConfig config_;
  Phase phase_ = Phase::Choose;
  Grip grip_;
  double grip_radius_ = 45.0;
  double hover_height_ = 30.0;
};

}  // namespace valvebench::env
