#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valvebench/devicebus/registers.hpp"
#include "valvebench/devicebus/transport.hpp"

namespace valvebench::devicebus {

enum class BusErrorKind { Timeout, Corrupt, DeviceStatus };

std::string_view bus_error_name(BusErrorKind k);

class BusError : public std::runtime_error {
 public:
  BusError(BusErrorKind kind, std::uint8_t id, const std::string& detail);
  BusErrorKind kind() const { return kind_; }
  std::uint8_t id() const { return id_; }

 private:
  BusErrorKind kind_;
  std::uint8_t id_;
};

/// Which chain each device id hangs off.
struct BusLayout {
  std::map<std::uint8_t, int> chain_of;
  /// Joint servo ids in joint order (finger-major).
  std::array<std::uint8_t, 9> joint_ids{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint8_t valve_encoder_id = 10;

  static BusLayout gripper();  // ids 1-9 on chains 0-2, encoder 10 on chain 3
  int chain(std::uint8_t id) const;
  std::vector<std::uint8_t> ids_on_chain(int chain) const;
  std::vector<std::uint8_t> all_ids() const;
};

struct PingInfo {
  std::uint16_t model = 0;
  std::uint8_t firmware = 0;
  Micros round_trip{0};
};

struct SyncWriteReport {
  std::vector<std::uint8_t> failed_ids;
  std::map<std::uint8_t, std::string> reasons;
  int transactions = 0;
  bool ok() const { return failed_ids.empty(); }
};

/// Register-level access to the servos. Every call is one transaction.
class ServoBus {
 public:
  ServoBus(Transport& transport, Clock& clock, BusLayout layout, Micros timeout = Micros{50'000});

  PingInfo ping(std::uint8_t id);
  std::uint32_t read_register(std::uint8_t id, std::uint16_t address);
  void write_register(std::uint8_t id, std::uint16_t address, std::uint32_t value);
  void reboot(std::uint8_t id);

  double read_position(std::uint8_t id);            // degrees, raw * 360 / 4096
  void write_goal(std::uint8_t id, double degrees);  // nearest tick, clamped
  void set_torque(std::uint8_t id, bool on);

  /// One WRITE per servo, grouped into a single transaction per chain.
  SyncWriteReport sync_write_goals(const std::array<double, 9>& degrees);

  const BusLayout& layout() const { return layout_; }
  Clock& clock() { return clock_; }
  Micros timeout() const { return timeout_; }

 private:
  struct Reply {
    std::optional<Packet> packet;
    std::optional<BusError> error;
  };
  /// Sends the frames of one chain; one reply slot per frame.
  std::vector<Reply> transact(int chain, const std::vector<Packet>& requests);
  Packet call(const Packet& request);

  Transport& transport_;
  Clock& clock_;
  BusLayout layout_;
  Micros timeout_;
};

}  // namespace valvebench::devicebus
