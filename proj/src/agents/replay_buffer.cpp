#include "valvebench/agents/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "valvebench/common/errors.hpp"

namespace valvebench::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int observation_dim, int action_dim)
    : capacity_(capacity), obs_dim_(observation_dim), act_dim_(action_dim) {
  require(capacity > 0, "ReplayBuffer: capacity must be positive");
  require(observation_dim > 0 && action_dim > 0, "ReplayBuffer: dimensions must be positive");
}

void ReplayBuffer::add(const Transition& t) {
  require(t.state.size() == std::size_t(obs_dim_) && t.next_state.size() == std::size_t(obs_dim_),
          "ReplayBuffer::add: state length mismatch");
  require(t.action.size() == std::size_t(act_dim_), "ReplayBuffer::add: action length mismatch");
  if (!std::isfinite(t.reward)) throw NumericFault("ReplayBuffer::add: non-finite reward");

  if (size_ < capacity_ && data_.size() < (cursor_ + 1) * width()) {
    data_.resize((cursor_ + 1) * width());
  }
  if (size_ == capacity_) {
    overwritten_.emplace_back(row(cursor_), row(cursor_) + width());
  }
  double* r = row(cursor_);
  r = std::copy(t.state.begin(), t.state.end(), r);
  r = std::copy(t.action.begin(), t.action.end(), r);
  *r++ = t.reward;
  r = std::copy(t.next_state.begin(), t.next_state.end(), r);
  *r = t.done ? 1.0 : 0.0;

  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  ++episode_adds_;
}

Transition ReplayBuffer::slot(std::size_t s) const {
  require(s < size_, "ReplayBuffer::slot: index out of range");
  const double* r = row(s);
  Transition t;
  t.state.assign(r, r + obs_dim_);
  r += obs_dim_;
  t.action.assign(r, r + act_dim_);
  r += act_dim_;
  t.reward = *r++;
  t.next_state.assign(r, r + obs_dim_);
  r += obs_dim_;
  t.done = *r != 0.0;
  return t;
}

Transition ReplayBuffer::at(std::size_t i) const {
  require(i < size_, "ReplayBuffer::at: index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
  return slot((oldest + i) % capacity_);
}

std::size_t ReplayBuffer::sample_slot(CounterRng& rng) const {
  require(size_ > 0, "ReplayBuffer::sample: buffer is empty");
  return static_cast<std::size_t>(rng.below(size_));
}

Batch ReplayBuffer::sample(std::size_t batch_size, CounterRng& rng) const {
  require(size_ >= batch_size, "ReplayBuffer::sample: fewer stored transitions than batch size");
  const auto n = static_cast<Eigen::Index>(batch_size);
  Batch b{Eigen::MatrixXd(obs_dim_, n), Eigen::MatrixXd(act_dim_, n), Eigen::VectorXd(n),
          Eigen::MatrixXd(obs_dim_, n), Eigen::VectorXd(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* r = row(sample_slot(rng));
    for (int i = 0; i < obs_dim_; ++i) b.states(i, j) = *r++;
    for (int i = 0; i < act_dim_; ++i) b.actions(i, j) = *r++;
    b.rewards(j) = *r++;
    for (int i = 0; i < obs_dim_; ++i) b.next_states(i, j) = *r++;
    b.dones(j) = *r;
  }
  return b;
}

void ReplayBuffer::begin_episode() {
  episode_adds_ = 0;
  overwritten_.clear();
}

void ReplayBuffer::rollback_episode() {
  // Once the ring fills, every later add displaces an entry, so the
  // displacing adds are exactly the last overwritten_.size() of the episode.
  const std::size_t grown = episode_adds_ - overwritten_.size();
  for (std::size_t k = episode_adds_; k-- > 0;) {
    cursor_ = (cursor_ + capacity_ - 1) % capacity_;
    if (k >= grown) {
      const auto& old = overwritten_[k - grown];
      std::copy(old.begin(), old.end(), row(cursor_));
    } else {
      --size_;
    }
  }
  begin_episode();
}

void ReplayBuffer::save(ArchiveWriter& out) const {
  out.text("buffer", std::to_string(capacity_) + " " + std::to_string(obs_dim_) + " " +
                         std::to_string(act_dim_) + " " + std::to_string(size_) + " " +
                         std::to_string(cursor_));
  for (std::size_t s = 0; s < size_; ++s) {
    out.values("t", std::span<const double>(row(s), width()));
  }
}

ReplayBuffer ReplayBuffer::load(ArchiveReader& in) {
  const auto head = in.record("buffer");
  if (head.size() != 5) throw FormatError("checkpoint: malformed buffer header");
  ReplayBuffer buf(parse_uint(head[0]), static_cast<int>(parse_int(head[1])),
                   static_cast<int>(parse_int(head[2])));
  buf.size_ = parse_uint(head[3]);
  buf.cursor_ = parse_uint(head[4]);
  if (buf.size_ > buf.capacity_ || buf.cursor_ >= buf.capacity_) {
    throw FormatError("checkpoint: buffer size/cursor out of range");
  }
  buf.data_.resize(buf.size_ * buf.width());
  for (std::size_t s = 0; s < buf.size_; ++s) {
    in.values_into("t", std::span<double>(buf.row(s), buf.width()));
  }
  return buf;
}

}  // namespace valvebench::agents
