#pragma once

#include <cstddef>
#include <vector>

#include "valvebench/agents/batch.hpp"
#include "valvebench/common/archive.hpp"
#include "valvebench/common/rng.hpp"

namespace valvebench::agents {

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  /// True only when the episode ended by reaching the goal; step-limit
  /// truncation is stored as false so the target still bootstraps.
  bool done = false;
};

/// Fixed-capacity FIFO ring of transitions with uniform sampling (with
/// replacement). Supports rolling back the transitions of the current
/// episode, including restoring any entries they overwrote.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int observation_dim, int action_dim);

  void add(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int observation_dim() const { return obs_dim_; }
  int action_dim() const { return act_dim_; }

  /// i-th oldest stored transition.
  Transition at(std::size_t i) const;
  /// Raw ring slot index that will be sampled next from this rng state.
  std::size_t sample_slot(CounterRng& rng) const;
  Transition slot(std::size_t s) const;
  Batch sample(std::size_t batch_size, CounterRng& rng) const;

  void begin_episode();
  /// Removes every transition added since begin_episode().
  void rollback_episode();
  std::size_t pending_in_episode() const { return episode_adds_; }

  void save(ArchiveWriter& out) const;
  static ReplayBuffer load(ArchiveReader& in);

 private:
  std::size_t width() const { return static_cast<std::size_t>(2 * obs_dim_ + act_dim_ + 2); }
  double* row(std::size_t s) { return data_.data() + s * width(); }
  const double* row(std::size_t s) const { return data_.data() + s * width(); }

  std::size_t capacity_;
  int obs_dim_;
  int act_dim_;
  std::vector<double> data_;  // slot-major rows: state, action, reward, next_state, done
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;

  std::size_t episode_adds_ = 0;
  std::vector<std::vector<double>> overwritten_;  // rows displaced during this episode
};

}  // namespace valvebench::agents
