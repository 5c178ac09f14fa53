#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "valvebench/common/archive.hpp"
#include "valvebench/common/rng.hpp"

namespace valvebench::harness {

/// Substreams derived from the master seed. Stream ids are part of the
/// checkpoint format; append new ones at the end.
enum class Stream : std::uint64_t {
  EnvInit = 1,      // starting valve angle of training episodes
  Goal,             // goal offset of training episodes
  NetInit,          // network weights
  BufferSampling,   // minibatch indices
  Exploration,      // uniform warm-up actions and action noise
  UpdateNoise,      // TD3 target smoothing, SAC reparameterization
  EvalEnv,          // valve angle of periodic eval episodes
  EvalGoal,         // goal of periodic eval episodes
  FinalEnv,         // valve angle of final evaluation episodes
  FinalGoal,        // goal of final evaluation episodes
};

inline constexpr std::size_t kStreamCount = 10;

std::string_view stream_name(Stream s);

struct RngSet {
  std::uint64_t seed = 0;
  std::array<CounterRng, kStreamCount> streams;

  CounterRng& operator[](Stream s) { return streams[static_cast<std::size_t>(s) - 1]; }
  const CounterRng& operator[](Stream s) const { return streams[static_cast<std::size_t>(s) - 1]; }

  void save(ArchiveWriter& out) const;
  static RngSet load(ArchiveReader& in);
  friend bool operator==(const RngSet&, const RngSet&) = default;
};

/// Stream s of seed k is CounterRng(k, s): streams never share draws, so
/// consuming one leaves every other untouched.
RngSet seed_all(std::uint64_t seed);

}  // namespace valvebench::harness
