#include "valvebench/agents/td3.hpp"

#include <algorithm>
#include <cmath>

#include "valvebench/common/errors.hpp"

namespace valvebench::agents {

using numkit::Activation;
using numkit::AdamState;
using numkit::DenseNet;

Td3Agent::Td3Agent(const AgentConfig& config, CounterRng& init)
    : Agent(config),
      actor_(make_actor(config_, config_.action_dim, Activation::Tanh, init)),
      actor_target_(actor_),
      critic1_(make_critic(config_, init)),
      critic1_target_(critic1_),
      critic2_(make_critic(config_, init)),
      critic2_target_(critic2_),
      actor_opt_(AdamState::for_net(actor_)),
      critic1_opt_(AdamState::for_net(critic1_)),
      critic2_opt_(AdamState::for_net(critic2_)) {}

std::vector<double> Td3Agent::select_action(std::span<const double> observation, ActionMode mode,
                                            CounterRng& noise) const {
  const Eigen::MatrixXd a = actor_.forward(observation_column(observation));
  std::vector<double> out(std::size_t(config_.action_dim));
  for (int i = 0; i < config_.action_dim; ++i) {
    double v = a(i, 0);
    if (mode == ActionMode::Explore) v += config_.exploration_noise_sigma * noise.normal();
    out[std::size_t(i)] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

Eigen::MatrixXd Td3Agent::target_action(const Eigen::MatrixXd& next_states,
                                        CounterRng& noise) const {
  Eigen::MatrixXd a = actor_target_.forward(next_states);
  const double c = config_.target_noise_clip;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double eps = std::clamp(config_.target_noise_sigma * noise.normal(), -c, c);
      a(i, j) = std::clamp(a(i, j) + eps, -1.0, 1.0);
    }
  }
  return a;
}

UpdateStats Td3Agent::update(const Batch& batch, CounterRng& noise) {
  ++update_count_;
  return update_at(batch, update_count_, noise);
}

UpdateStats Td3Agent::update_at(const Batch& batch, std::uint64_t update_index,
                                CounterRng& noise) {
  require(update_index >= 1, "Td3Agent::update_at: update index is 1-based");
  const double n = static_cast<double>(batch.size());
  const Eigen::MatrixXd next_in = critic_input(batch.next_states, target_action(batch.next_states, noise));
  const Eigen::VectorXd q1 = critic1_target_.forward(next_in).row(0).transpose();
  const Eigen::VectorXd q2 = critic2_target_.forward(next_in).row(0).transpose();
  const Eigen::VectorXd y = twin_min_target(batch.rewards, batch.dones, q1, q2, config_.gamma);

  const Eigen::MatrixXd in = critic_input(batch.states, batch.actions);
  UpdateStats stats;
  stats.critic_loss = regress_critic(critic1_, critic1_opt_, in, y, config_.critic_lr) +
                      regress_critic(critic2_, critic2_opt_, in, y, config_.critic_lr);

  if (update_index % std::uint64_t(config_.policy_delay) != 0) return stats;

  const auto actor_cache = actor_.forward_cached(batch.states);
  const auto q_cache = critic1_.forward_cached(critic_input(batch.states, actor_cache.result()));
  const double actor_loss = -q_cache.result().row(0).mean();
  if (!std::isfinite(actor_loss)) throw NumericFault("actor update: non-finite loss");
  const auto dq = numkit::backward(critic1_, q_cache,
                                   Eigen::MatrixXd::Constant(1, batch.size(), -1.0 / n), false);
  const auto actor_grads =
      numkit::backward(actor_, actor_cache, dq.input_grad.bottomRows(config_.action_dim));
  numkit::adam_step(actor_, actor_grads.grads, actor_opt_, config_.actor_lr);
  stats.actor_loss = actor_loss;

  numkit::soft_update(critic1_target_, critic1_, config_.tau);
  numkit::soft_update(critic2_target_, critic2_, config_.tau);
  numkit::soft_update(actor_target_, actor_, config_.tau);
  return stats;
}

std::uint64_t Td3Agent::parameter_checksum() const {
  std::uint64_t h = 0;
  for (const auto* net : {&actor_, &actor_target_, &critic1_, &critic1_target_, &critic2_,
                          &critic2_target_}) {
    h = splitmix64(h ^ net->checksum());
  }
  return h;
}

void Td3Agent::save_body(ArchiveWriter& out) const {
  actor_.save(out, "actor");
  actor_target_.save(out, "actor_target");
  critic1_.save(out, "critic1");
  critic1_target_.save(out, "critic1_target");
  critic2_.save(out, "critic2");
  critic2_target_.save(out, "critic2_target");
  actor_opt_.save(out, "actor");
  critic1_opt_.save(out, "critic1");
  critic2_opt_.save(out, "critic2");
}

void Td3Agent::load_body(ArchiveReader& in) {
  auto actor = DenseNet::load(in, "actor");
  auto actor_target = DenseNet::load(in, "actor_target");
  auto critic1 = DenseNet::load(in, "critic1");
  auto critic1_target = DenseNet::load(in, "critic1_target");
  auto critic2 = DenseNet::load(in, "critic2");
  auto critic2_target = DenseNet::load(in, "critic2_target");
  if (!actor.same_shape(actor_) || !actor_target.same_shape(actor_) ||
      !critic1.same_shape(critic1_) || !critic1_target.same_shape(critic1_) ||
      !critic2.same_shape(critic2_) || !critic2_target.same_shape(critic2_)) {
    throw FormatError("checkpoint: network shapes do not match the configured agent");
  }
  actor_opt_ = AdamState::load(in, "actor", actor);
  critic1_opt_ = AdamState::load(in, "critic1", critic1);
  critic2_opt_ = AdamState::load(in, "critic2", critic2);
  actor_ = std::move(actor);
  actor_target_ = std::move(actor_target);
  critic1_ = std::move(critic1);
  critic1_target_ = std::move(critic1_target);
  critic2_ = std::move(critic2);
  critic2_target_ = std::move(critic2_target);
}

}  // namespace valvebench::agents
