#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace valvebench::devicebus {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kHeader[4] = {0xFF, 0xFF, 0xFD, 0x00};
inline constexpr std::uint8_t kBroadcastId = 254;
inline constexpr std::uint8_t kMaxDeviceId = 253;
/// Header, id and length field.
inline constexpr std::size_t kPrefixSize = 7;

enum class Instruction : std::uint8_t {
  Ping = 0x01,
  Read = 0x02,
  Write = 0x03,
  Reboot = 0x08,
  Status = 0x55,
};

std::string_view instruction_name(Instruction i);
/// Accepts the names used in fault scripts: PING, READ, WRITE, REBOOT, STATUS.
Instruction instruction_from_string(std::string_view name);

/// Status packets carry the device error byte as params[0].
struct Packet {
  std::uint8_t id = 0;
  Instruction instruction = Instruction::Ping;
  Bytes params;

  friend bool operator==(const Packet&, const Packet&) = default;
};

enum class FrameError { Framing, Integrity, Incomplete };

class PacketError : public std::runtime_error {
 public:
  PacketError(FrameError kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FrameError kind() const { return kind_; }

 private:
  FrameError kind_;
};

/// CRC-16 with polynomial 0x8005, MSB first, no reflection, init 0.
std::uint16_t crc16(std::span<const std::uint8_t> bytes);

/// header | id | length (LE, instruction + params + crc) | instruction | params | crc (LE)
Bytes encode_packet(const Packet& p);

/// Decodes the frame at the start of `bytes`. Never looks past the declared
/// length. `consumed` receives the frame size on success.
Packet decode_packet(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

/// Declared size of the frame at the start of `bytes`, or 0 when the prefix
/// is incomplete or not a header. Lets a reader skip a corrupt frame.
std::size_t declared_frame_size(std::span<const std::uint8_t> bytes);

}  // namespace valvebench::devicebus
