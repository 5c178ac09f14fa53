#include "valvebench/devicebus/mock_bus.hpp"

#include <cmath>

#include "valvebench/common/errors.hpp"
#include "valvebench/env/angles.hpp"
#include "valvebench/env/geometry.hpp"

namespace valvebench::devicebus {

namespace {

void put_le(Bytes& out, std::uint32_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_le(std::span<const std::uint8_t> b) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < b.size(); ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

Bytes status(std::uint8_t id, std::uint8_t error, const Bytes& data = {}) {
  Packet p{id, Instruction::Status, {error}};
  p.params.insert(p.params.end(), data.begin(), data.end());
  return encode_packet(p);
}

}  // namespace

MockBus::MockBus(VirtualClock& clock) : clock_(clock) {}

MockBus MockBus::gripper(VirtualClock& clock) {
  MockBus bus(clock);
  for (std::uint8_t id = 1; id <= 9; ++id) bus.add_servo(id, (id - 1) / 3);
  bus.add_encoder(kValveEncoderId, 3);
  return bus;
}

void MockBus::add_servo(std::uint8_t id, int chain, double initial_deg) {
  require(id <= kMaxDeviceId && !devices_.count(id), "MockBus: bad or duplicate id");
  MockDevice d;
  d.id = id;
  d.chain = chain;
  d.goal = ticks_from_degrees(initial_deg);
  d.present = d.goal;
  devices_[id] = d;
}

void MockBus::add_encoder(std::uint8_t id, int chain) {
  require(id <= kMaxDeviceId && !devices_.count(id), "MockBus: bad or duplicate id");
  MockDevice d;
  d.id = id;
  d.chain = chain;
  d.encoder = true;
  d.model = kEncoderModel;
  d.present = 0.0;
  devices_[id] = d;
}

void MockBus::attach_valve(const env::EnvConfig& config, double initial_valve_deg,
                           double joint_offset_deg) {
  valve_config_ = config;
  joint_offset_deg_ = joint_offset_deg;
  valve_deg_ = env::wrap360(initial_valve_deg);
  contacts_ = {};
  contacts_.engaged.fill(env::kNoProng);
}

void MockBus::set_valve_angle(double degrees) { valve_deg_ = env::wrap360(degrees); }

MockDevice& MockBus::device(std::uint8_t id) {
  const auto it = devices_.find(id);
  require(it != devices_.end(), "MockBus: no device " + std::to_string(id));
  return it->second;
}

void MockBus::settle() {
  const double dt_ms = std::chrono::duration<double, std::milli>(clock_.now() - last_settle_).count();
  last_settle_ = clock_.now();
  const double reach = ticks_per_ms * dt_ms;
  for (auto& [id, d] : devices_) {
    if (d.encoder || !d.torque) continue;
    const double gap = d.goal - d.present;
    d.present = std::abs(gap) <= reach ? d.goal : d.present + std::copysign(reach, gap);
  }
}

void MockBus::sample_valve(MockDevice& encoder) {
  if (valve_config_) {
    env::JointVector q{};
    for (std::size_t j = 0; j < env::kJointCount; ++j) {
      const auto it = devices_.find(static_cast<std::uint8_t>(j + 1));
      require(it != devices_.end(), "MockBus: valve rule needs joint servos 1-9");
      q[j] = degrees_from_ticks(static_cast<std::uint16_t>(std::lround(it->second.present))) -
             joint_offset_deg_;
    }
    const auto tips = env::fingertip_positions(q, valve_config_->geometry);
    const auto adv = env::advance_valve(contacts_, tips, valve_deg_, valve_config_->contact);
    valve_deg_ = env::wrap360(valve_deg_ + adv.delta_deg);
    contacts_ = adv.contacts;
  }
  encoder.present = static_cast<double>(std::lround(valve_deg_ / kDegreesPerTick) % kTicksPerTurn);
}

std::optional<Bytes> MockBus::respond(MockDevice& dev, const Packet& req) {
  const std::uint8_t alert = dev.hardware_error ? kErrHardwareAlert : 0;
  switch (req.instruction) {
    case Instruction::Ping: {
      Bytes data;
      put_le(data, dev.model, 2);
      data.push_back(dev.firmware);
      return status(dev.id, alert, data);
    }
    case Instruction::Read: {
      if (req.params.size() != 4) return status(dev.id, kErrInstruction | alert);
      const auto addr = static_cast<std::uint16_t>(get_le(std::span(req.params).first(2)));
      const auto len = get_le(std::span(req.params).subspan(2, 2));
      const auto width = register_width(addr);
      if (!width || (dev.encoder && (addr == kRegGoalPosition || addr == kRegTorqueEnable))) {
        return status(dev.id, kErrAccess | alert);
      }
      if (len != std::uint32_t(*width)) return status(dev.id, kErrDataLength | alert);
      std::uint32_t value = 0;
      switch (addr) {
        case kRegModelNumber: value = dev.model; break;
        case kRegFirmware: value = dev.firmware; break;
        case kRegTorqueEnable: value = dev.torque; break;
        case kRegGoalPosition: value = dev.goal; break;
        case kRegPresentPosition:
          if (dev.encoder) sample_valve(dev);
          value = static_cast<std::uint32_t>(std::lround(dev.present));
          break;
        case kRegHardwareError: value = dev.hardware_error; break;
      }
      Bytes data;
      put_le(data, value, *width);
      return status(dev.id, alert, data);
    }
    case Instruction::Write: {
      if (req.params.size() < 3) return status(dev.id, kErrInstruction | alert);
      const auto addr = static_cast<std::uint16_t>(get_le(std::span(req.params).first(2)));
      const auto data = std::span(req.params).subspan(2);
      const auto width = register_width(addr);
      if (!width || !register_writable(addr) || dev.encoder) return status(dev.id, kErrAccess | alert);
      if (data.size() != std::size_t(*width)) return status(dev.id, kErrDataLength | alert);
      const auto value = get_le(data);
      if (addr == kRegTorqueEnable) dev.torque = value ? 1 : 0;
      if (addr == kRegGoalPosition) {
        if (value > kMaxTick) return status(dev.id, kErrAccess | alert);
        dev.goal = static_cast<std::uint16_t>(value);
      }
      return status(dev.id, alert);
    }
    case Instruction::Reboot:
      dev.hardware_error = 0;
      ++dev.reboots;
      return status(dev.id, 0);
    case Instruction::Status:
      return std::nullopt;  // devices ignore stray status frames
  }
  return std::nullopt;
}

Bytes MockBus::exchange(int chain, std::span<const std::uint8_t> request, int /*expected_replies*/,
                        Micros timeout) {
  ++transactions_;
  Bytes reply;
  std::size_t offset = 0;
  while (offset < request.size()) {
    settle();
    Packet req;
    std::size_t used = 0;
    try {
      req = decode_packet(request.subspan(offset), &used);
    } catch (const PacketError&) {
      break;  // devices cannot resynchronize within this transaction
    }
    offset += used;
    const std::uint64_t nth = ++frames_;
    const auto it = devices_.find(req.id);
    if (it == devices_.end() || it->second.chain != chain) {
      clock_.sleep(timeout);
      continue;
    }
    MockDevice& dev = it->second;
    const auto hit = script_.apply(nth, req);
    if (hit && (hit->effect == FaultEffect::DropResponse)) {
      clock_.sleep(timeout);
      continue;
    }
    if (hit && hit->effect == FaultEffect::ErrorStatus) {
      clock_.sleep(frame_time);
      const auto bytes = status(dev.id, hit->error_code);
      reply.insert(reply.end(), bytes.begin(), bytes.end());
      continue;
    }
    auto bytes = respond(dev, req);
    if (hit && hit->effect == FaultEffect::DelayPastTimeout) {
      clock_.sleep(timeout + frame_time);
      continue;
    }
    clock_.sleep(frame_time);
    if (!bytes) continue;
    if (hit && hit->effect == FaultEffect::CorruptCrc) bytes->back() ^= 0x5A;
    reply.insert(reply.end(), bytes->begin(), bytes->end());
  }
  settle();
  return reply;
}

}  // namespace valvebench::devicebus
