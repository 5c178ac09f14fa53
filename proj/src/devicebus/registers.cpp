#include "valvebench/devicebus/registers.hpp"

#include <algorithm>
#include <cmath>

namespace valvebench::devicebus {

std::optional<int> register_width(std::uint16_t address) {
  switch (address) {
    case kRegModelNumber: return 2;
    case kRegFirmware: return 1;
    case kRegTorqueEnable: return 1;
    case kRegGoalPosition: return 2;
    case kRegPresentPosition: return 2;
    case kRegHardwareError: return 1;
    default: return std::nullopt;
  }
}

bool register_writable(std::uint16_t address) {
  return address == kRegTorqueEnable || address == kRegGoalPosition;
}

double degrees_from_ticks(std::uint16_t ticks) { return ticks * kDegreesPerTick; }

std::uint16_t ticks_from_degrees(double degrees) {
  const double t = std::nearbyint(degrees / kDegreesPerTick);
  return static_cast<std::uint16_t>(std::clamp(t, 0.0, double(kMaxTick)));
}

}  // namespace valvebench::devicebus
