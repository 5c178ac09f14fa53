#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "valvebench/devicebus/packet.hpp"
#include "valvebench/devicebus/registers.hpp"

namespace valvebench::devicebus {

enum class FaultEffect {
  DropResponse,        // no reply; the caller times out
  CorruptCrc,          // reply with its CRC damaged
  DelayPastTimeout,    // reply arrives after the timeout and is discarded
  ErrorStatus,         // reply with a nonzero error byte
  RecoverAfterReboot,  // drop replies until the device receives REBOOT
};

std::string_view effect_name(FaultEffect e);

/// All present matchers must hold. `nth` counts request frames on the whole
/// bus, starting at 1.
struct FaultRule {
  std::optional<std::uint64_t> nth;
  std::optional<Instruction> instruction;
  std::optional<std::uint8_t> id;
  FaultEffect effect = FaultEffect::DropResponse;
  std::uint8_t error_code = kErrHardwareAlert;
  std::optional<std::uint64_t> times;  // unlimited when unset
  std::uint64_t applied = 0;
  bool retired = false;
};

struct FaultHit {
  FaultEffect effect;
  std::uint8_t error_code;
};

/// Ordered rules; the first live matching rule fires. Text form, one rule per
/// line, `#` comments:
///   [nth N] [instruction NAME] [id N] EFFECT [CODE] [times N]
/// e.g. `id 4 instruction READ error_status 0x80 times 2`.
class FaultScript {
 public:
  static FaultScript parse(std::string_view text);
  static FaultScript load_file(const std::filesystem::path& path);

  void add(FaultRule rule) { rules_.push_back(rule); }
  /// Consumes one application of the first live rule matching the request.
  /// A REBOOT retires the matching recover_after_reboot rules instead.
  std::optional<FaultHit> apply(std::uint64_t nth, const Packet& request);

  const std::vector<FaultRule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

 private:
  std::vector<FaultRule> rules_;
};

}  // namespace valvebench::devicebus
