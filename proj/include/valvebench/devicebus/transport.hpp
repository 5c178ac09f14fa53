#pragma once

#include <chrono>
#include <span>

#include "valvebench/devicebus/packet.hpp"

namespace valvebench::devicebus {

using Micros = std::chrono::microseconds;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Micros now() const = 0;
  virtual void sleep(Micros d) = 0;
};

class SteadyClock final : public Clock {
 public:
  Micros now() const override;
  void sleep(Micros d) override;
};

/// Time advances only when someone sleeps or a mock transaction runs.
class VirtualClock final : public Clock {
 public:
  Micros now() const override { return now_; }
  void sleep(Micros d) override { now_ += d; }

 private:
  Micros now_{0};
};

/// One serialized request/response exchange on one chain. `request` may hold
/// several frames; the reply is whatever arrived before the timeout, with
/// replies in request order. `expected_replies` lets a real port stop
/// reading early.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Bytes exchange(int chain, std::span<const std::uint8_t> request, int expected_replies,
                         Micros timeout) = 0;
};

}  // namespace valvebench::devicebus
