#pragma once

#include <cstdint>
#include <optional>

namespace valvebench::devicebus {

// Control table subset of a small smart servo.
inline constexpr std::uint16_t kRegModelNumber = 0;      // 2 bytes, read-only
inline constexpr std::uint16_t kRegFirmware = 2;         // 1 byte, read-only
inline constexpr std::uint16_t kRegTorqueEnable = 24;    // 1 byte
inline constexpr std::uint16_t kRegGoalPosition = 30;    // 2 bytes
inline constexpr std::uint16_t kRegPresentPosition = 37; // 2 bytes, read-only
inline constexpr std::uint16_t kRegHardwareError = 50;   // 1 byte, read-only

/// Width of a defined register, or nullopt for undefined addresses.
std::optional<int> register_width(std::uint16_t address);
bool register_writable(std::uint16_t address);

// Status error byte.
inline constexpr std::uint8_t kErrResultFail = 0x01;
inline constexpr std::uint8_t kErrInstruction = 0x02;
inline constexpr std::uint8_t kErrDataLength = 0x04;
inline constexpr std::uint8_t kErrAccess = 0x07;
inline constexpr std::uint8_t kErrHardwareAlert = 0x80;

inline constexpr int kTicksPerTurn = 4096;
inline constexpr std::uint16_t kMaxTick = 4095;
inline constexpr double kDegreesPerTick = 360.0 / kTicksPerTurn;

double degrees_from_ticks(std::uint16_t ticks);
/// Nearest tick, clamped to [0, 4095].
std::uint16_t ticks_from_degrees(double degrees);

}  // namespace valvebench::devicebus
