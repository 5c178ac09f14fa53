#include "valvebench/agents/sac.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "valvebench/common/errors.hpp"

namespace valvebench::agents {

using numkit::Activation;
using numkit::AdamState;
using numkit::DenseNet;

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

Eigen::VectorXd squashed_log_prob(const Eigen::MatrixXd& pre_tanh, const Eigen::MatrixXd& mean,
                                  const Eigen::MatrixXd& log_std) {
  require(pre_tanh.rows() == mean.rows() && pre_tanh.cols() == mean.cols() &&
              log_std.rows() == mean.rows() && log_std.cols() == mean.cols(),
          "squashed_log_prob: shape mismatch");
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  Eigen::VectorXd out(pre_tanh.cols());
  for (Eigen::Index j = 0; j < pre_tanh.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < pre_tanh.rows(); ++i) {
      const double u = pre_tanh(i, j);
      const double z = (u - mean(i, j)) / std::exp(log_std(i, j));
      s += -0.5 * z * z - log_std(i, j) - half_log_2pi;
      s -= 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
    }
    out(j) = s;
  }
  return out;
}

SacAgent::SacAgent(const AgentConfig& config, CounterRng& init)
    : Agent(config),
      actor_(make_actor(config_, 2 * config_.action_dim, Activation::Identity, init)),
      critic1_(make_critic(config_, init)),
      critic1_target_(critic1_),
      critic2_(make_critic(config_, init)),
      critic2_target_(critic2_),
      actor_opt_(AdamState::for_net(actor_)),
      critic1_opt_(AdamState::for_net(critic1_)),
      critic2_opt_(AdamState::for_net(critic2_)),
      log_alpha_(std::log(config_.initial_alpha)) {}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

void SacAgent::policy_heads(const Eigen::MatrixXd& actor_out, Eigen::MatrixXd& mean,
                            Eigen::MatrixXd& log_std) const {
  const int d = config_.action_dim;
  require(actor_out.rows() == 2 * d, "SacAgent::policy_heads: actor output has wrong height");
  mean = actor_out.topRows(d);
  log_std = actor_out.bottomRows(d).cwiseMax(config_.log_std_min).cwiseMin(config_.log_std_max);
}

SquashedSample SacAgent::sample(const Eigen::MatrixXd& states, CounterRng& noise) const {
  Eigen::MatrixXd mean, log_std;
  policy_heads(actor_.forward(states), mean, log_std);
  SquashedSample s;
  s.noise.resize(mean.rows(), mean.cols());
  for (Eigen::Index j = 0; j < mean.cols(); ++j)
    for (Eigen::Index i = 0; i < mean.rows(); ++i) s.noise(i, j) = noise.normal();
  s.std_dev = log_std.array().exp();
  s.pre_tanh = mean.array() + s.std_dev.array() * s.noise.array();
  s.action = s.pre_tanh.array().tanh();
  s.log_prob = squashed_log_prob(s.pre_tanh, mean, log_std);
  return s;
}

std::vector<double> SacAgent::select_action(std::span<const double> observation, ActionMode mode,
                                            CounterRng& noise) const {
  const Eigen::MatrixXd obs = observation_column(observation);
  Eigen::MatrixXd a;
  if (mode == ActionMode::Greedy) {
    Eigen::MatrixXd mean, log_std;
    policy_heads(actor_.forward(obs), mean, log_std);
    a = mean.array().tanh();
  } else {
    a = sample(obs, noise).action;
  }
  std::vector<double> out(std::size_t(config_.action_dim));
  for (int i = 0; i < config_.action_dim; ++i) out[std::size_t(i)] = std::clamp(a(i, 0), -1.0, 1.0);
  return out;
}

UpdateStats SacAgent::update(const Batch& batch, CounterRng& noise) {
  const double n = static_cast<double>(batch.size());
  const int d = config_.action_dim;
  const double alpha_now = alpha();

  // Critics.
  const SquashedSample next = sample(batch.next_states, noise);
  const Eigen::MatrixXd next_in = critic_input(batch.next_states, next.action);
  const Eigen::VectorXd nq1 = critic1_target_.forward(next_in).row(0).transpose();
  const Eigen::VectorXd nq2 = critic2_target_.forward(next_in).row(0).transpose();
  const Eigen::VectorXd y = soft_target(batch.rewards, batch.dones, nq1.cwiseMin(nq2),
                                        next.log_prob, alpha_now, config_.gamma);
  const Eigen::MatrixXd in = critic_input(batch.states, batch.actions);
  UpdateStats stats;
  stats.critic_loss = regress_critic(critic1_, critic1_opt_, in, y, config_.critic_lr) +
                      regress_critic(critic2_, critic2_opt_, in, y, config_.critic_lr);

  // Actor: minimize mean(alpha * log_pi - min_q) through the reparameterized sample.
  const auto actor_cache = actor_.forward_cached(batch.states);
  const Eigen::MatrixXd& raw = actor_cache.result();
  Eigen::MatrixXd mean, log_std;
  policy_heads(raw, mean, log_std);
  Eigen::MatrixXd xi(d, batch.size());
  for (Eigen::Index j = 0; j < xi.cols(); ++j)
    for (Eigen::Index i = 0; i < d; ++i) xi(i, j) = noise.normal();
  const Eigen::ArrayXXd sd = log_std.array().exp();
  const Eigen::MatrixXd u = mean.array() + sd * xi.array();
  const Eigen::ArrayXXd a = u.array().tanh();
  const Eigen::VectorXd log_prob = squashed_log_prob(u, mean, log_std);

  const Eigen::MatrixXd q_in = critic_input(batch.states, a.matrix());
  const auto c1 = critic1_.forward_cached(q_in);
  const auto c2 = critic2_.forward_cached(q_in);
  Eigen::RowVectorXd w1(batch.size()), w2(batch.size()), q(batch.size());
  for (Eigen::Index j = 0; j < batch.size(); ++j) {
    const bool first = c1.result()(0, j) <= c2.result()(0, j);
    w1(j) = first ? 1.0 : 0.0;
    w2(j) = first ? 0.0 : 1.0;
    q(j) = first ? c1.result()(0, j) : c2.result()(0, j);
  }
  const double actor_loss = (alpha_now * log_prob.transpose() - q).mean();
  if (!std::isfinite(actor_loss)) throw NumericFault("actor update: non-finite loss");
  const Eigen::MatrixXd g = numkit::backward(critic1_, c1, w1, false).input_grad.bottomRows(d) +
                            numkit::backward(critic2_, c2, w2, false).input_grad.bottomRows(d);

  const Eigen::ArrayXXd one_minus_a2 = 1.0 - a.square();
  const Eigen::ArrayXXd d_mean = (alpha_now * 2.0 * a - g.array() * one_minus_a2) / n;
  Eigen::ArrayXXd d_log_std =
      (alpha_now * (-1.0 + 2.0 * a * sd * xi.array()) - g.array() * one_minus_a2 * sd * xi.array()) / n;
  const Eigen::ArrayXXd raw_ls = raw.bottomRows(d).array();
  d_log_std = (raw_ls >= config_.log_std_min && raw_ls <= config_.log_std_max).select(d_log_std, 0.0);
  Eigen::MatrixXd upstream(2 * d, batch.size());
  upstream.topRows(d) = d_mean.matrix();
  upstream.bottomRows(d) = d_log_std.matrix();
  const auto actor_grads = numkit::backward(actor_, actor_cache, upstream);
  numkit::adam_step(actor_, actor_grads.grads, actor_opt_, config_.actor_lr);
  stats.actor_loss = actor_loss;

  // Temperature: loss -alpha * mean(log_pi + target_entropy), optimized in log space.
  const double entropy_gap = (log_prob.array() + config_.resolved_target_entropy()).mean();
  const double alpha_loss = -alpha_now * entropy_gap;
  if (!std::isfinite(alpha_loss)) throw NumericFault("temperature update: non-finite loss");
  alpha_opt_.step(log_alpha_, alpha_loss, config_.alpha_lr);
  stats.alpha_loss = alpha_loss;

  numkit::soft_update(critic1_target_, critic1_, config_.tau);
  numkit::soft_update(critic2_target_, critic2_, config_.tau);
  ++update_count_;
  return stats;
}

std::uint64_t SacAgent::parameter_checksum() const {
  std::uint64_t h = 0;
  for (const auto* net : {&actor_, &critic1_, &critic1_target_, &critic2_, &critic2_target_}) {
    h = splitmix64(h ^ net->checksum());
  }
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(log_alpha_));
  std::memcpy(&bits, &log_alpha_, sizeof bits);
  return splitmix64(h ^ bits);
}

void SacAgent::save_body(ArchiveWriter& out) const {
  actor_.save(out, "actor");
  critic1_.save(out, "critic1");
  critic1_target_.save(out, "critic1_target");
  critic2_.save(out, "critic2");
  critic2_target_.save(out, "critic2_target");
  actor_opt_.save(out, "actor");
  critic1_opt_.save(out, "critic1");
  critic2_opt_.save(out, "critic2");
  out.scalar("log_alpha", log_alpha_);
  out.values("alpha_adam", std::vector<double>{alpha_opt_.m, alpha_opt_.v});
  out.unsigned_integer("alpha_adam_t", alpha_opt_.t);
}

void SacAgent::load_body(ArchiveReader& in) {
  auto actor = DenseNet::load(in, "actor");
  auto critic1 = DenseNet::load(in, "critic1");
  auto critic1_target = DenseNet::load(in, "critic1_target");
  auto critic2 = DenseNet::load(in, "critic2");
  auto critic2_target = DenseNet::load(in, "critic2_target");
  if (!actor.same_shape(actor_) || !critic1.same_shape(critic1_) ||
      !critic1_target.same_shape(critic1_) || !critic2.same_shape(critic2_) ||
      !critic2_target.same_shape(critic2_)) {
    throw FormatError("checkpoint: network shapes do not match the configured agent");
  }
  actor_opt_ = AdamState::load(in, "actor", actor);
  critic1_opt_ = AdamState::load(in, "critic1", critic1);
  critic2_opt_ = AdamState::load(in, "critic2", critic2);
  const double log_alpha = in.scalar("log_alpha");
  const std::vector<double> moments = in.values("alpha_adam");
  if (moments.size() != 2) throw FormatError("checkpoint: alpha_adam expects 2 values");
  alpha_opt_.t = in.unsigned_integer("alpha_adam_t");
  alpha_opt_.m = moments[0];
  alpha_opt_.v = moments[1];
  log_alpha_ = log_alpha;
  actor_ = std::move(actor);
  critic1_ = std::move(critic1);
  critic1_target_ = std::move(critic1_target);
  critic2_ = std::move(critic2);
  critic2_target_ = std::move(critic2_target);
}

}  // namespace valvebench::agents
