#pragma once

#include <map>
#include <string>

#include "valvebench/devicebus/transport.hpp"

namespace valvebench::devicebus {

/// POSIX serial ports, one per chain, 8N1 raw mode. Not exercised in CI.
class SerialTransport final : public Transport {
 public:
  /// `ports` maps chain index to a device path such as /dev/ttyUSB0.
  SerialTransport(const std::map<int, std::string>& ports, int baud = 1'000'000);
  ~SerialTransport() override;
  SerialTransport(const SerialTransport&) = delete;
  SerialTransport& operator=(const SerialTransport&) = delete;

  Bytes exchange(int chain, std::span<const std::uint8_t> request, int expected_replies,
                 Micros timeout) override;

 private:
  std::map<int, int> fds_;
};

}  // namespace valvebench::devicebus
