#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "valvebench/devicebus/fault_script.hpp"
#include "valvebench/devicebus/transport.hpp"
#include "valvebench/env/contact.hpp"
#include "valvebench/env/gripper_env.hpp"

namespace valvebench::devicebus {

inline constexpr std::uint16_t kServoModel = 350;
inline constexpr std::uint16_t kEncoderModel = 3600;

struct MockDevice {
  std::uint8_t id = 1;
  int chain = 0;
  bool encoder = false;
  std::uint16_t model = kServoModel;
  std::uint8_t firmware = 41;
  std::uint8_t torque = 0;
  std::uint16_t goal = 2048;
  double present = 2048.0;  // ticks; servos glide toward goal while torque is on
  std::uint8_t hardware_error = 0;
  std::uint64_t reboots = 0;
};

/// Virtual-time stand-in for a chain of servos and a valve encoder. Replies
/// follow the same wire format as real devices; a FaultScript can drop,
/// corrupt, delay or fail individual replies.
class MockBus final : public Transport {
 public:
  explicit MockBus(VirtualClock& clock);

  /// Three chains of three joint servos (ids 1-9, finger-major) and the valve
  /// encoder (id 10) on a fourth chain.
  static constexpr std::uint8_t kValveEncoderId = 10;
  static MockBus gripper(VirtualClock& clock);

  void add_servo(std::uint8_t id, int chain, double initial_deg = 180.0);
  void add_encoder(std::uint8_t id, int chain);
  void set_fault_script(FaultScript script) { script_ = std::move(script); }
  FaultScript& fault_script() { return script_; }

  /// Makes the encoder follow the valve: whenever it is sampled, the joint
  /// servos' present positions (minus `joint_offset_deg`) drive the same
  /// contact rule as the simulator.
  void attach_valve(const env::EnvConfig& config, double initial_valve_deg,
                    double joint_offset_deg = 180.0);
  void set_valve_angle(double degrees);
  double valve_angle() const { return valve_deg_; }

  Bytes exchange(int chain, std::span<const std::uint8_t> request, int expected_replies,
                 Micros timeout) override;

  std::uint64_t transactions() const { return transactions_; }
  std::uint64_t frames_seen() const { return frames_; }
  MockDevice& device(std::uint8_t id);
  const std::map<std::uint8_t, MockDevice>& devices() const { return devices_; }

  Micros frame_time{500};
  double ticks_per_ms = 8.0;

 private:
  void settle();
  std::optional<Bytes> respond(MockDevice& dev, const Packet& request);
  void sample_valve(MockDevice& encoder);

  VirtualClock& clock_;
  Micros last_settle_{0};
  std::map<std::uint8_t, MockDevice> devices_;
  FaultScript script_;
  std::uint64_t transactions_ = 0;
  std::uint64_t frames_ = 0;

  std::optional<env::EnvConfig> valve_config_;
  double joint_offset_deg_ = 180.0;
  double valve_deg_ = 0.0;
  env::ContactState contacts_;
};

}  // namespace valvebench::devicebus
