#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>

namespace valvebench::env {

inline constexpr std::size_t kFingerCount = 3;
inline constexpr std::size_t kJointsPerFinger = 3;
inline constexpr std::size_t kJointCount = kFingerCount * kJointsPerFinger;
inline constexpr std::size_t kProngCount = 4;
inline constexpr std::size_t kObservationSize = kJointCount + 2 * kProngCount + 2;

/// Joint angles in degrees, finger-major: (abduction, flex1, flex2) per finger.
using JointVector = std::array<double, kJointCount>;
using TipPositions = std::array<Eigen::Vector3d, kFingerCount>;
using ProngTips = std::array<Eigen::Vector2d, kProngCount>;

struct JointLimits {
  JointVector lo{};
  JointVector hi{};

  /// Abduction +-30, flex1 [0, 100], flex2 [0, 110] on every finger.
  static JointLimits defaults();
  static JointLimits uniform(double abduction, double flex1_lo, double flex1_hi, double flex2_lo,
                             double flex2_hi);
  bool contains(const JointVector& q) const;
};

/// Identical fingers mounted at azimuth i*120 deg on a circle above the valve.
/// At zero flexion a finger points straight down; flex1 = 90 points the
/// first link horizontally toward the valve axis.
struct FingerGeometry {
  double base_radius = 100.0;  // mm
  double base_height = 60.0;   // mm above the valve plane
  double link1 = 60.0;         // mm
  double link2 = 50.0;         // mm

  double azimuth_deg(std::size_t finger) const { return 120.0 * static_cast<double>(finger); }
  Eigen::Vector3d base(std::size_t finger) const;
};

Eigen::Vector3d fingertip_position(std::size_t finger, double abduction_deg, double flex1_deg,
                                   double flex2_deg, const FingerGeometry& geom);
TipPositions fingertip_positions(const JointVector& q, const FingerGeometry& geom);

/// Prong tip k sits at prong_length * (cos, sin)(valve + 90k).
ProngTips valve_tip_positions(double valve_deg, double prong_length);

}  // namespace valvebench::env
