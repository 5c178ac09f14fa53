#include "valvebench/env/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "valvebench/env/angles.hpp"

namespace valvebench::env {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double polar_deg(const Eigen::Vector3d& p) { return std::atan2(p.y(), p.x()) / kDeg; }

double radial(const Eigen::Vector3d& p) { return std::hypot(p.x(), p.y()); }

double distance_to_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& end) {
  const double len2 = end.squaredNorm();
  const double t = std::clamp(p.dot(end) / len2, 0.0, 1.0);
  return (p - t * end).norm();
}

bool in_band(const Eigen::Vector3d& tip, const ContactParams& params) {
  const double r = radial(tip);
  return std::abs(tip.z()) <= params.contact_height && r >= params.hub_radius &&
         r <= params.prong_length + params.contact_radius;
}

}  // namespace

int engaged_prong(const Eigen::Vector3d& tip, double valve_deg, const ContactParams& params) {
  if (std::abs(tip.z()) > params.contact_height || radial(tip) < params.hub_radius) {
    return kNoProng;
  }
  const Eigen::Vector2d xy(tip.x(), tip.y());
  const auto prongs = valve_tip_positions(valve_deg, params.prong_length);
  int best = kNoProng;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kProngCount; ++k) {
    const double d = distance_to_segment(xy, prongs[k]);
    if (d <= params.contact_radius && d < best_dist) {
      best = static_cast<int>(k);
      best_dist = d;
    }
  }
  return best;
}

ContactState settle_contacts(const TipPositions& tips, double valve_deg,
                             const ContactParams& params) {
  ContactState state;
  state.tips = tips;
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    state.engaged[f] = engaged_prong(tips[f], valve_deg, params);
  }
  return state;
}

ValveAdvance advance_valve(const ContactState& previous, const TipPositions& tips,
                           double valve_before_deg, const ContactParams& params) {
  ValveAdvance out;
  double sum = 0.0;
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    if (previous.engaged[f] == kNoProng || !in_band(tips[f], params)) continue;
    sum += angdiff(polar_deg(tips[f]), polar_deg(previous.tips[f]));
    ++out.contributors;
  }
  if (out.contributors > 0) {
    out.delta_deg = std::clamp(sum / out.contributors, -params.max_valve_step,
                               params.max_valve_step);
  }
  out.contacts = settle_contacts(tips, wrap360(valve_before_deg + out.delta_deg), params);
  return out;
}

}  // namespace valvebench::env
