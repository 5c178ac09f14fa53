#include "valvebench/env/geometry.hpp"

#include <cmath>
#include <numbers>

namespace valvebench::env {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

JointLimits JointLimits::uniform(double abduction, double flex1_lo, double flex1_hi,
                                 double flex2_lo, double flex2_hi) {
  JointLimits l;
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    l.lo[3 * f + 0] = -abduction;
    l.hi[3 * f + 0] = abduction;
    l.lo[3 * f + 1] = flex1_lo;
    l.hi[3 * f + 1] = flex1_hi;
    l.lo[3 * f + 2] = flex2_lo;
    l.hi[3 * f + 2] = flex2_hi;
  }
  return l;
}

JointLimits JointLimits::defaults() { return uniform(30.0, 0.0, 100.0, 0.0, 110.0); }

bool JointLimits::contains(const JointVector& q) const {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (q[i] < lo[i] || q[i] > hi[i]) return false;
  }
  return true;
}

Eigen::Vector3d FingerGeometry::base(std::size_t finger) const {
  const double phi = azimuth_deg(finger) * kDeg;
  return {base_radius * std::cos(phi), base_radius * std::sin(phi), base_height};
}

Eigen::Vector3d fingertip_position(std::size_t finger, double abduction_deg, double flex1_deg,
                                   double flex2_deg, const FingerGeometry& geom) {
  // Inward horizontal direction, rotated about the vertical by the abduction.
  const double heading = (geom.azimuth_deg(finger) + 180.0 + abduction_deg) * kDeg;
  const double q1 = flex1_deg * kDeg;
  const double q12 = (flex1_deg + flex2_deg) * kDeg;
  const double reach = geom.link1 * std::sin(q1) + geom.link2 * std::sin(q12);
  const double drop = geom.link1 * std::cos(q1) + geom.link2 * std::cos(q12);
  const Eigen::Vector3d b = geom.base(finger);
  return {b.x() + reach * std::cos(heading), b.y() + reach * std::sin(heading), b.z() - drop};
}

TipPositions fingertip_positions(const JointVector& q, const FingerGeometry& geom) {
  TipPositions tips;
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    tips[f] = fingertip_position(f, q[3 * f], q[3 * f + 1], q[3 * f + 2], geom);
  }
  return tips;
}

ProngTips valve_tip_positions(double valve_deg, double prong_length) {
  ProngTips tips;
  for (std::size_t k = 0; k < kProngCount; ++k) {
    const double a = (valve_deg + 90.0 * static_cast<double>(k)) * kDeg;
    tips[k] = {prong_length * std::cos(a), prong_length * std::sin(a)};
  }
  return tips;
}

}  // namespace valvebench::env
