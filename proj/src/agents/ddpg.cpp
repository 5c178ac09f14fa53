#include "valvebench/agents/ddpg.hpp"

#include <algorithm>
#include <cmath>

#include "valvebench/common/errors.hpp"

namespace valvebench::agents {

using numkit::Activation;
using numkit::AdamState;

DdpgAgent::DdpgAgent(const AgentConfig& config, CounterRng& init)
    : Agent(config),
      actor_(make_actor(config_, config_.action_dim, Activation::Tanh, init)),
      actor_target_(actor_),
      critic_(make_critic(config_, init)),
      critic_target_(critic_),
      actor_opt_(AdamState::for_net(actor_)),
      critic_opt_(AdamState::for_net(critic_)) {}

std::vector<double> DdpgAgent::select_action(std::span<const double> observation, ActionMode mode,
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

UpdateStats DdpgAgent::update(const Batch& batch, CounterRng& /*noise*/) {
  const double n = static_cast<double>(batch.size());
  const Eigen::MatrixXd next_actions = actor_target_.forward(batch.next_states);
  const Eigen::VectorXd next_q =
      critic_target_.forward(critic_input(batch.next_states, next_actions)).row(0).transpose();
  const Eigen::VectorXd y = td_target(batch.rewards, batch.dones, next_q, config_.gamma);

  UpdateStats stats;
  stats.critic_loss =
      regress_critic(critic_, critic_opt_, critic_input(batch.states, batch.actions), y,
                     config_.critic_lr);

  // Actor ascends Q(s, pi(s)) through the freshly updated critic.
  const auto actor_cache = actor_.forward_cached(batch.states);
  const auto q_cache = critic_.forward_cached(critic_input(batch.states, actor_cache.result()));
  const double actor_loss = -q_cache.result().row(0).mean();
  if (!std::isfinite(actor_loss)) throw NumericFault("actor update: non-finite loss");
  const auto dq = numkit::backward(critic_, q_cache,
                                   Eigen::MatrixXd::Constant(1, batch.size(), -1.0 / n), false);
  const auto actor_grads =
      numkit::backward(actor_, actor_cache, dq.input_grad.bottomRows(config_.action_dim));
  numkit::adam_step(actor_, actor_grads.grads, actor_opt_, config_.actor_lr);
  stats.actor_loss = actor_loss;

  numkit::soft_update(critic_target_, critic_, config_.tau);
  numkit::soft_update(actor_target_, actor_, config_.tau);
  ++update_count_;
  return stats;
}

std::uint64_t DdpgAgent::parameter_checksum() const {
  std::uint64_t h = 0;
  for (const auto* net : {&actor_, &actor_target_, &critic_, &critic_target_}) {
    h = splitmix64(h ^ net->checksum());
  }
  return h;
}

void DdpgAgent::save_body(ArchiveWriter& out) const {
  actor_.save(out, "actor");
  actor_target_.save(out, "actor_target");
  critic_.save(out, "critic");
  critic_target_.save(out, "critic_target");
  actor_opt_.save(out, "actor");
  critic_opt_.save(out, "critic");
}

void DdpgAgent::load_body(ArchiveReader& in) {
  auto actor = numkit::DenseNet::load(in, "actor");
  auto actor_target = numkit::DenseNet::load(in, "actor_target");
  auto critic = numkit::DenseNet::load(in, "critic");
  auto critic_target = numkit::DenseNet::load(in, "critic_target");
  if (!actor.same_shape(actor_) || !actor_target.same_shape(actor_) ||
      !critic.same_shape(critic_) || !critic_target.same_shape(critic_)) {
    throw FormatError("checkpoint: network shapes do not match the configured agent");
  }
  actor_opt_ = AdamState::load(in, "actor", actor);
  critic_opt_ = AdamState::load(in, "critic", critic);
  actor_ = std::move(actor);
  actor_target_ = std::move(actor_target);
  critic_ = std::move(critic);
  critic_target_ = std::move(critic_target);
}

}  // namespace valvebench::agents
