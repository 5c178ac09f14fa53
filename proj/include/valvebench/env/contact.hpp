#pragma once

#include <array>

#include "valvebench/env/geometry.hpp"

namespace valvebench::env {

struct ContactParams {
  double prong_length = 50.0;    // mm
  double contact_radius = 15.0;  // mm, XY distance to a prong segment
  double contact_height = 20.0;  // mm, |z| band around the valve plane
  double hub_radius = 10.0;      // mm, tips closer to the axis never engage
  double max_valve_step = 20.0;  // deg per step
};

inline constexpr int kNoProng = -1;

/// Fingertip positions and prong engagement at the end of a step.
struct ContactState {
  TipPositions tips{};
  std::array<int, kFingerCount> engaged{kNoProng, kNoProng, kNoProng};
};

/// Prong index the tip is touching at the given valve angle, or kNoProng.
int engaged_prong(const Eigen::Vector3d& tip, double valve_deg, const ContactParams& params);

ContactState settle_contacts(const TipPositions& tips, double valve_deg,
                             const ContactParams& params);

struct ValveAdvance {
  double delta_deg = 0.0;
  int contributors = 0;
  ContactState contacts;
};

/// Planar stick-contact rule. A finger engaged with a prong at the end of
/// the previous step that is still inside the contact band drags that prong
/// by its own polar-angle change about the valve axis. The valve turns by the
/// mean of those changes clamped to +-max_valve_step; with no such finger it
/// stays put. Engagement is then re-evaluated against the new valve angle.
ValveAdvance advance_valve(const ContactState& previous, const TipPositions& tips,
                           double valve_before_deg, const ContactParams& params);

}  // namespace valvebench::env
