#include "valvebench/harness/rng_set.hpp"

#include <string>

#include "valvebench/common/errors.hpp"

namespace valvebench::harness {

std::string_view stream_name(Stream s) {
  switch (s) {
    case Stream::EnvInit: return "env_init";
    case Stream::Goal: return "goal";
    case Stream::NetInit: return "net_init";
    case Stream::BufferSampling: return "buffer_sampling";
    case Stream::Exploration: return "exploration";
    case Stream::UpdateNoise: return "update_noise";
    case Stream::EvalEnv: return "eval_env";
    case Stream::EvalGoal: return "eval_goal";
    case Stream::FinalEnv: return "final_env";
    case Stream::FinalGoal: return "final_goal";
  }
  return "?";
}

RngSet seed_all(std::uint64_t seed) {
  RngSet set;
  set.seed = seed;
  for (std::size_t i = 0; i < kStreamCount; ++i) set.streams[i] = CounterRng(seed, i + 1);
  return set;
}

void RngSet::save(ArchiveWriter& out) const {
  out.unsigned_integer("seed", seed);
  for (std::size_t i = 0; i < kStreamCount; ++i) {
    const auto s = static_cast<Stream>(i + 1);
    out.text("rng", std::string(stream_name(s)) + " " + std::to_string(streams[i].key()) + " " +
                        std::to_string(streams[i].cursor()));
  }
}

RngSet RngSet::load(ArchiveReader& in) {
  RngSet set;
  set.seed = in.unsigned_integer("seed");
  for (std::size_t i = 0; i < kStreamCount; ++i) {
    const auto fields = in.record("rng");
    const auto expected = stream_name(static_cast<Stream>(i + 1));
    if (fields.size() != 3 || fields[0] != expected) {
      throw FormatError("checkpoint: expected rng stream '" + std::string(expected) + "'");
    }
    set.streams[i] = CounterRng::from_state(parse_uint(fields[1]), parse_uint(fields[2]));
  }
  return set;
}

}  // namespace valvebench::harness
