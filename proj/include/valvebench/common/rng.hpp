#pragma once

#include <cstdint>

namespace valvebench {

/// Counter-based generator: output i of a stream is a pure function of
/// (key, i), so a stream's state is fully described by its key and cursor.
/// Keys are derived from a master seed and a stream id with SplitMix64.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static CounterRng from_state(std::uint64_t key, std::uint64_t cursor);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller; always consumes two draws.
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t cursor() const { return cursor_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t cursor_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace valvebench
