#include "valvebench/devicebus/packet.hpp"
#include "valvebench/common/errors.hpp"

#include <algorithm>
#include <string>

namespace valvebench::devicebus {

std::string_view instruction_name(Instruction i) {
  switch (i) {
    case Instruction::Ping: return "PING";
    case Instruction::Read: return "READ";
    case Instruction::Write: return "WRITE";
    case Instruction::Reboot: return "REBOOT";
    case Instruction::Status: return "STATUS";
  }
  return "?";
}

Instruction instruction_from_string(std::string_view name) {
  for (auto i : {Instruction::Ping, Instruction::Read, Instruction::Write, Instruction::Reboot,
                 Instruction::Status}) {
    if (instruction_name(i) == name) return i;
  }
  throw std::invalid_argument("unknown instruction '" + std::string(name) + "'");
}

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0;
  for (std::uint8_t b : bytes) {
    crc ^= static_cast<std::uint16_t>(b << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x8005)
                           : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

namespace {

bool known_instruction(std::uint8_t v) {
  return v == 0x01 || v == 0x02 || v == 0x03 || v == 0x08 || v == 0x55;
}

}  // namespace

Bytes encode_packet(const Packet& p) {
  require(p.id <= kBroadcastId, "encode_packet: id out of range");
  const std::size_t length = p.params.size() + 3;
  require(length <= 0xFFFF, "encode_packet: params too long");
  Bytes out(std::begin(kHeader), std::end(kHeader));
  out.reserve(kPrefixSize + length);
  out.push_back(p.id);
  out.push_back(static_cast<std::uint8_t>(length & 0xFF));
  out.push_back(static_cast<std::uint8_t>(length >> 8));
  out.push_back(static_cast<std::uint8_t>(p.instruction));
  out.insert(out.end(), p.params.begin(), p.params.end());
  const auto crc = crc16(out);
  out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
  out.push_back(static_cast<std::uint8_t>(crc >> 8));
  return out;
}

std::size_t declared_frame_size(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPrefixSize || !std::equal(std::begin(kHeader), std::end(kHeader), bytes.begin())) {
    return 0;
  }
  return kPrefixSize + (std::size_t(bytes[5]) | (std::size_t(bytes[6]) << 8));
}

Packet decode_packet(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  const std::size_t header_have = std::min(bytes.size(), std::size(kHeader));
  if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(header_have),
                  std::begin(kHeader))) {
    throw PacketError(FrameError::Framing, "bad header");
  }
  if (bytes.size() < kPrefixSize) throw PacketError(FrameError::Incomplete, "truncated prefix");
  const std::size_t length = std::size_t(bytes[5]) | (std::size_t(bytes[6]) << 8);
  if (length < 3) throw PacketError(FrameError::Framing, "length below minimum");
  const std::size_t total = kPrefixSize + length;
  if (bytes.size() < total) throw PacketError(FrameError::Incomplete, "truncated frame");
  const auto frame = bytes.first(total);
  const std::uint16_t wire = static_cast<std::uint16_t>(frame[total - 2] | (frame[total - 1] << 8));
  if (crc16(frame.first(total - 2)) != wire) throw PacketError(FrameError::Integrity, "crc mismatch");
  if (frame[4] > kBroadcastId) throw PacketError(FrameError::Framing, "id out of range");
  if (!known_instruction(frame[7])) throw PacketError(FrameError::Framing, "unknown instruction");
  Packet p;
  p.id = frame[4];
  p.instruction = static_cast<Instruction>(frame[7]);
  p.params.assign(frame.begin() + 8, frame.begin() + static_cast<std::ptrdiff_t>(total - 2));
  if (consumed) *consumed = total;
  return p;
}

}  // namespace valvebench::devicebus
