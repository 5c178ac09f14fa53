#include "valvebench/devicebus/servo_bus.hpp"

#include <algorithm>

#include "valvebench/common/errors.hpp"

namespace valvebench::devicebus {

std::string_view bus_error_name(BusErrorKind k) {
  switch (k) {
    case BusErrorKind::Timeout: return "timeout";
    case BusErrorKind::Corrupt: return "corrupt";
    case BusErrorKind::DeviceStatus: return "device-status";
  }
  return "?";
}

BusError::BusError(BusErrorKind kind, std::uint8_t id, const std::string& detail)
    : std::runtime_error("id " + std::to_string(id) + ": " + std::string(bus_error_name(kind)) +
                         (detail.empty() ? "" : " (" + detail + ")")),
      kind_(kind),
      id_(id) {}

BusLayout BusLayout::gripper() {
  BusLayout l;
  for (std::uint8_t id = 1; id <= 9; ++id) l.chain_of[id] = (id - 1) / 3;
  l.chain_of[10] = 3;
  return l;
}

int BusLayout::chain(std::uint8_t id) const {
  const auto it = chain_of.find(id);
  require(it != chain_of.end(), "bus: id " + std::to_string(id) + " is not configured");
  return it->second;
}

std::vector<std::uint8_t> BusLayout::ids_on_chain(int c) const {
  std::vector<std::uint8_t> out;
  for (const auto& [id, ch] : chain_of)
    if (ch == c) out.push_back(id);
  return out;
}

std::vector<std::uint8_t> BusLayout::all_ids() const {
  std::vector<std::uint8_t> out;
  for (const auto& [id, ch] : chain_of) out.push_back(id);
  return out;
}

ServoBus::ServoBus(Transport& transport, Clock& clock, BusLayout layout, Micros timeout)
    : transport_(transport), clock_(clock), layout_(std::move(layout)), timeout_(timeout) {}

std::vector<ServoBus::Reply> ServoBus::transact(int chain, const std::vector<Packet>& requests) {
  Bytes wire;
  for (const auto& r : requests) {
    const auto frame = encode_packet(r);
    wire.insert(wire.end(), frame.begin(), frame.end());
  }
  const Bytes reply =
      transport_.exchange(chain, wire, static_cast<int>(requests.size()), timeout_);

  // Collect status frames by id; a damaged frame is skipped by its declared length.
  std::map<std::uint8_t, Reply> by_id;
  std::span<const std::uint8_t> rest(reply);
  while (!rest.empty()) {
    const auto header = std::search(rest.begin(), rest.end(), std::begin(kHeader), std::end(kHeader));
    rest = rest.subspan(static_cast<std::size_t>(header - rest.begin()));
    if (rest.empty()) break;
    std::size_t used = 0;
    try {
      Packet p = decode_packet(rest, &used);
      if (p.instruction == Instruction::Status && !by_id.count(p.id)) by_id[p.id].packet = std::move(p);
      rest = rest.subspan(used);
    } catch (const PacketError& e) {
      const std::size_t declared = declared_frame_size(rest);
      if (e.kind() == FrameError::Integrity && rest.size() >= kPrefixSize) {
        const std::uint8_t id = rest[4];
        if (!by_id.count(id)) by_id[id].error = BusError(BusErrorKind::Corrupt, id, e.what());
      }
      rest = (declared > 0 && declared <= rest.size()) ? rest.subspan(declared) : rest.subspan(1);
    }
  }

  std::vector<Reply> out;
  for (const auto& r : requests) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      out.push_back({std::nullopt, BusError(BusErrorKind::Timeout, r.id, "no status")});
      continue;
    }
    Reply rep = it->second;
    if (rep.packet) {
      const auto& params = rep.packet->params;
      if (params.empty()) {
        rep = {std::nullopt, BusError(BusErrorKind::Corrupt, r.id, "status without error byte")};
      } else if (params[0] & 0x7F) {
        rep = {std::nullopt, BusError(BusErrorKind::DeviceStatus, r.id,
                                      "error byte " + std::to_string(params[0]))};
      } else if (params[0] & kErrHardwareAlert) {
        rep = {std::nullopt, BusError(BusErrorKind::DeviceStatus, r.id, "hardware alert")};
      }
    }
    out.push_back(std::move(rep));
  }
  return out;
}

Packet ServoBus::call(const Packet& request) {
  auto replies = transact(layout_.chain(request.id), {request});
  if (replies[0].error) throw *replies[0].error;
  return std::move(*replies[0].packet);
}

PingInfo ServoBus::ping(std::uint8_t id) {
  const auto start = clock_.now();
  const auto p = call({id, Instruction::Ping, {}});
  if (p.params.size() != 4) throw BusError(BusErrorKind::Corrupt, id, "short ping reply");
  return {static_cast<std::uint16_t>(p.params[1] | (p.params[2] << 8)), p.params[3],
          clock_.now() - start};
}

std::uint32_t ServoBus::read_register(std::uint8_t id, std::uint16_t address) {
  const auto width = register_width(address);
  require(width.has_value(), "read_register: undefined address " + std::to_string(address));
  const auto p = call({id, Instruction::Read,
                       {static_cast<std::uint8_t>(address & 0xFF), static_cast<std::uint8_t>(address >> 8),
                        static_cast<std::uint8_t>(*width), 0}});
  if (p.params.size() != std::size_t(1 + *width)) {
    throw BusError(BusErrorKind::Corrupt, id, "read reply has wrong length");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < *width; ++i) v |= std::uint32_t(p.params[std::size_t(1 + i)]) << (8 * i);
  return v;
}

void ServoBus::write_register(std::uint8_t id, std::uint16_t address, std::uint32_t value) {
  const auto width = register_width(address);
  require(width.has_value(), "write_register: undefined address " + std::to_string(address));
  Packet p{id, Instruction::Write,
           {static_cast<std::uint8_t>(address & 0xFF), static_cast<std::uint8_t>(address >> 8)}};
  for (int i = 0; i < *width; ++i) p.params.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  call(p);
}

void ServoBus::reboot(std::uint8_t id) { call({id, Instruction::Reboot, {}}); }

double ServoBus::read_position(std::uint8_t id) {
  const auto raw = read_register(id, kRegPresentPosition);
  if (raw > kMaxTick) throw BusError(BusErrorKind::Corrupt, id, "position out of range");
  return degrees_from_ticks(static_cast<std::uint16_t>(raw));
}

void ServoBus::write_goal(std::uint8_t id, double degrees) {
  write_register(id, kRegGoalPosition, ticks_from_degrees(degrees));
}

void ServoBus::set_torque(std::uint8_t id, bool on) {
  write_register(id, kRegTorqueEnable, on ? 1 : 0);
}

SyncWriteReport ServoBus::sync_write_goals(const std::array<double, 9>& degrees) {
  std::map<int, std::vector<Packet>> per_chain;
  for (std::size_t j = 0; j < degrees.size(); ++j) {
    const std::uint8_t id = layout_.joint_ids[j];
    const auto ticks = ticks_from_degrees(degrees[j]);
    per_chain[layout_.chain(id)].push_back(
        {id, Instruction::Write,
         {static_cast<std::uint8_t>(kRegGoalPosition & 0xFF), static_cast<std::uint8_t>(kRegGoalPosition >> 8),
          static_cast<std::uint8_t>(ticks & 0xFF), static_cast<std::uint8_t>(ticks >> 8)}});
  }
  SyncWriteReport report;
  for (const auto& [chain, requests] : per_chain) {
    const auto replies = transact(chain, requests);
    ++report.transactions;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (replies[i].error) {
        report.failed_ids.push_back(requests[i].id);
        report.reasons[requests[i].id] = replies[i].error->what();
      }
    }
  }
  std::sort(report.failed_ids.begin(), report.failed_ids.end());
  return report;
}

}  // namespace valvebench::devicebus
