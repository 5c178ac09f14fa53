#include "valvebench/env/scripted_controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "valvebench/env/angles.hpp"

namespace valvebench::env {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kArrived = 1e-6;  // mm

double polar_deg(const Eigen::Vector3d& p) { return std::atan2(p.y(), p.x()) / kDeg; }

}  // namespace

std::optional<std::array<double, 3>> finger_ik(std::size_t finger, const Eigen::Vector3d& tip,
                                               const FingerGeometry& geom,
                                               const JointLimits& limits) {
  const Eigen::Vector3d rel = tip - geom.base(finger);
  const double reach = std::hypot(rel.x(), rel.y());
  const double drop = -rel.z();
  const double abduction =
      reach < 1e-12 ? 0.0
                    : angdiff(std::atan2(rel.y(), rel.x()) / kDeg, geom.azimuth_deg(finger) + 180.0);
  const double c2 = (reach * reach + drop * drop - geom.link1 * geom.link1 -
                     geom.link2 * geom.link2) /
                    (2.0 * geom.link1 * geom.link2);
  if (c2 < -1.0 || c2 > 1.0) return std::nullopt;
  const double q2 = std::acos(c2);
  const double q1 =
      std::atan2(reach, drop) - std::atan2(geom.link2 * std::sin(q2), geom.link1 + geom.link2 * c2);
  const std::array<double, 3> q{abduction, q1 / kDeg, q2 / kDeg};
  for (std::size_t j = 0; j < 3; ++j) {
    if (q[j] < limits.lo[3 * finger + j] || q[j] > limits.hi[3 * finger + j]) return std::nullopt;
  }
  return q;
}

ScriptedController::ScriptedController(EnvConfig config) : config_(std::move(config)) {
  grip_radius_ = std::min(grip_radius_, config_.contact.prong_length);
}

void ScriptedController::begin_episode() { phase_ = Phase::Choose; }

Eigen::Vector3d ScriptedController::grip_point(double polar, double z) const {
  return {grip_radius_ * std::cos(polar * kDeg), grip_radius_ * std::sin(polar * kDeg), z};
}

bool ScriptedController::reachable(std::size_t finger, double polar, double z) const {
  return finger_ik(finger, grip_point(polar, z), config_.geometry, config_.limits).has_value();
}

std::optional<ScriptedController::Grip> ScriptedController::choose_grip(double valve,
                                                                        double direction) const {
  std::optional<Grip> best;
  double best_sweep = 0.0;
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    for (std::size_t k = 0; k < kProngCount; ++k) {
      const double start = valve + 90.0 * static_cast<double>(k);
      if (!reachable(f, start, 0.0) || !reachable(f, start, hover_height_)) continue;
      double sweep = 0.0;
      while (sweep < 180.0 && reachable(f, start + direction * (sweep + 1.0), 0.0)) sweep += 1.0;
      if (sweep > best_sweep) {
        best_sweep = sweep;
        best = Grip{f, start, start + direction * sweep};
      }
    }
  }
  return best;
}

bool ScriptedController::approach(JointVector& targets, const JointVector& q,
                                  const Eigen::Vector3d& goal) const {
  const std::size_t f = grip_.finger;
  const Eigen::Vector3d from = fingertip_position(f, q[3 * f], q[3 * f + 1], q[3 * f + 2],
                                                  config_.geometry);
  auto fits = [&](const std::array<double, 3>& sol) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (std::abs(sol[j] - q[3 * f + j]) > config_.max_joint_step) return false;
    }
    return true;
  };
  double frac = 1.0;
  for (int attempt = 0; attempt < 30; ++attempt, frac *= 0.5) {
    const Eigen::Vector3d point = from + frac * (goal - from);
    const auto sol = finger_ik(f, point, config_.geometry, config_.limits);
    if (sol && fits(*sol)) {
      std::copy(sol->begin(), sol->end(), targets.begin() + 3 * f);
      return frac == 1.0;
    }
  }
  // Straight line leaves the workspace: fall back to a joint-space move.
  if (const auto sol = finger_ik(f, goal, config_.geometry, config_.limits)) {
    std::copy(sol->begin(), sol->end(), targets.begin() + 3 * f);
  }
  return false;
}

std::array<double, kJointCount> ScriptedController::act(const Observation& obs) {
  const JointVector q = obs.joints();
  const double valve = obs.valve();
  const double remaining = angdiff(obs.goal(), valve);
  const double direction = remaining >= 0.0 ? 1.0 : -1.0;

  JointVector targets = config_.home_pose();
  if (phase_ == Phase::Choose) {
    if (const auto g = choose_grip(valve, direction)) {
      grip_ = *g;
      phase_ = Phase::Hover;
    }
  }
  // Fingers that are not working keep their home pose.
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    if (phase_ == Phase::Choose || f != grip_.finger) continue;
    std::copy_n(q.begin() + 3 * f, 3, targets.begin() + 3 * f);
  }

  const std::size_t f = grip_.finger;
  const Eigen::Vector3d tip =
      fingertip_position(f, q[3 * f], q[3 * f + 1], q[3 * f + 2], config_.geometry);
  switch (phase_) {
    case Phase::Choose: break;
    case Phase::Hover: {
      const auto hover = grip_point(grip_.start_deg, hover_height_);
      if ((tip - hover).norm() < kArrived) {
        phase_ = Phase::Descend;
      } else {
        approach(targets, q, hover);
        break;
      }
      [[fallthrough]];
    }
    case Phase::Descend: {
      const auto contact = grip_point(grip_.start_deg, 0.0);
      if ((tip - contact).norm() < kArrived) {
        phase_ = Phase::Sweep;
      } else {
        approach(targets, q, contact);
        break;
      }
      [[fallthrough]];
    }
    case Phase::Sweep: {
      const double here = polar_deg(tip);
      const double room = direction * angdiff(grip_.end_deg, here);
      const double want = std::min(std::abs(remaining), room);
      if (want > 1e-9) {
        double advance = std::min(want, 0.75 * config_.contact.max_valve_step);
        for (int attempt = 0; attempt < 30; ++attempt, advance *= 0.5) {
          const auto sol = finger_ik(f, grip_point(here + direction * advance, tip.z()),
                                     config_.geometry, config_.limits);
          bool fits = sol.has_value();
          for (std::size_t j = 0; fits && j < 3; ++j) {
            fits = std::abs((*sol)[j] - q[3 * f + j]) <= config_.max_joint_step;
          }
          if (fits) {
            std::copy(sol->begin(), sol->end(), targets.begin() + 3 * f);
            return targets_to_action(targets, config_.limits);
          }
        }
      }
      phase_ = Phase::Lift;
      [[fallthrough]];
    }
    case Phase::Lift: {
      const Eigen::Vector3d above(tip.x(), tip.y(), hover_height_);
      if (tip.z() >= hover_height_ - kArrived) {
        phase_ = Phase::Choose;
        return act(obs);
      }
      approach(targets, q, above);
      break;
    }
  }
  return targets_to_action(targets, config_.limits);
}

}  // namespace valvebench::env
