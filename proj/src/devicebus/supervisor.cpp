#include "valvebench/devicebus/supervisor.hpp"

namespace valvebench::devicebus {

void SupervisorPolicy::validate() const {
  require(failure_threshold >= 1, "supervisor: failure_threshold must be >= 1");
  require(max_reboots >= 0, "supervisor: max_reboots must be >= 0");
  require(post_reboot_settle.count() >= 0, "supervisor: settle time must be non-negative");
}

ManualInterventionRequired::ManualInterventionRequired(std::uint8_t id, CallTrace trace)
    : HardwareEscalation("device " + std::to_string(id) + " unresponsive after " +
                         std::to_string(trace.reboots) + " reboot cycles; manual reboot required"),
      id_(id),
      trace_(std::move(trace)) {}

Supervisor::Supervisor(ServoBus& bus, SupervisorPolicy policy) : bus_(bus), policy_(policy) {
  policy_.validate();
}

void Supervisor::reboot_cycle(std::uint8_t id, CallTrace& trace) {
  const bool first = trace.reboots == 0;
  const auto targets =
      first ? std::vector<std::uint8_t>{id} : bus_.layout().ids_on_chain(bus_.layout().chain(id));
  for (const auto target : targets) {
    try {
      bus_.reboot(target);
      trace.history.push_back("reboot " + std::to_string(target));
    } catch (const BusError& e) {
      trace.history.push_back("reboot " + std::to_string(target) + " unacknowledged: " + e.what());
    }
  }
  ++trace.reboots;
  ++total_reboots_;
  bus_.clock().sleep(policy_.post_reboot_settle);
}

void Supervisor::run(std::uint8_t id, const std::function<void()>& op) {
  CallTrace trace;
  int consecutive = 0;
  for (;;) {
    ++trace.attempts;
    if (trace.attempts > 1) ++total_retries_;
    try {
      op();
      last_ = std::move(trace);
      return;
    } catch (const BusError& e) {
      ++trace.failures;
      ++consecutive;
      trace.history.push_back(e.what());
    }
    if (consecutive < policy_.failure_threshold) continue;
    if (trace.reboots >= policy_.max_reboots) {
      last_ = trace;
      throw ManualInterventionRequired(id, std::move(trace));
    }
    reboot_cycle(id, trace);
    consecutive = 0;
  }
}

}  // namespace valvebench::devicebus
