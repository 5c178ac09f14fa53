#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "valvebench/common/errors.hpp"
#include "valvebench/devicebus/servo_bus.hpp"

namespace valvebench::devicebus {

struct SupervisorPolicy {
  int failure_threshold = 3;  // consecutive failures before a reboot
  int max_reboots = 3;        // reboot cycles before escalation
  Micros post_reboot_settle{500'000};

  void validate() const;
};

/// What one supervised call went through.
struct CallTrace {
  int attempts = 0;
  int failures = 0;
  int reboots = 0;
  std::vector<std::string> history;  // failures and reboots in order
};

/// The supervisor gave up; the gripper needs a manual reboot.
class ManualInterventionRequired : public HardwareEscalation {
 public:
  ManualInterventionRequired(std::uint8_t id, CallTrace trace);
  std::uint8_t id() const { return id_; }
  const CallTrace& trace() const { return trace_; }

 private:
  std::uint8_t id_;
  CallTrace trace_;
};

/// Retries bus operations. After failure_threshold consecutive failures it
/// reboots: the failing device on the first cycle, its whole chain on later
/// ones, then waits post_reboot_settle. After max_reboots cycles without a
/// success it throws ManualInterventionRequired.
class Supervisor {
 public:
  Supervisor(ServoBus& bus, SupervisorPolicy policy = {});

  template <class F>
  auto call(std::uint8_t id, F&& op) -> decltype(op()) {
    using R = decltype(op());
    if constexpr (std::is_void_v<R>) {
      run(id, [&] { op(); });
    } else {
      std::optional<R> out;
      run(id, [&] { out.emplace(op()); });
      return std::move(*out);
    }
  }

  const CallTrace& last() const { return last_; }
  std::uint64_t total_reboots() const { return total_reboots_; }
  std::uint64_t total_retries() const { return total_retries_; }
  const SupervisorPolicy& policy() const { return policy_; }
  ServoBus& bus() { return bus_; }

 private:
  void run(std::uint8_t id, const std::function<void()>& op);
  void reboot_cycle(std::uint8_t id, CallTrace& trace);

  ServoBus& bus_;
  SupervisorPolicy policy_;
  CallTrace last_;
  std::uint64_t total_reboots_ = 0;
  std::uint64_t total_retries_ = 0;
};

}  // namespace valvebench::devicebus
