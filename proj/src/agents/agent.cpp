#include "valvebench/agents/agent.hpp"

#include <cmath>
#include <string>

#include "valvebench/agents/ddpg.hpp"
#include "valvebench/agents/sac.hpp"
#include "valvebench/agents/td3.hpp"
#include "valvebench/common/errors.hpp"

namespace valvebench::agents {

using numkit::Activation;
using numkit::DenseNet;

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Ddpg: return "ddpg";
    case Algorithm::Td3: return "td3";
    case Algorithm::Sac: return "sac";
  }
  return "td3";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "ddpg") return Algorithm::Ddpg;
  if (name == "td3") return Algorithm::Td3;
  if (name == "sac") return Algorithm::Sac;
  throw FormatError("unknown algorithm '" + std::string(name) + "' (expected ddpg, td3, sac)");
}

void AgentConfig::validate() const {
  require(observation_dim > 0 && action_dim > 0, "agent config: dimensions must be positive");
  require(!hidden.empty(), "agent config: at least one hidden layer");
  for (int h : hidden) require(h > 0, "agent config: hidden widths must be positive");
  require(actor_lr > 0 && critic_lr > 0 && alpha_lr > 0, "agent config: learning rates must be positive");
  require(gamma >= 0 && gamma <= 1, "agent config: gamma must lie in [0, 1]");
  require(tau > 0 && tau <= 1, "agent config: tau must lie in (0, 1]");
  require(policy_delay >= 1, "agent config: policy_delay must be >= 1");
  require(target_noise_sigma >= 0 && target_noise_clip >= 0 && exploration_noise_sigma >= 0,
          "agent config: noise scales must be non-negative");
  require(initial_alpha > 0, "agent config: initial alpha must be positive");
  require(log_std_min < log_std_max, "agent config: log-std bounds inverted");
}

Agent::Agent(AgentConfig config) : config_(std::move(config)) { config_.validate(); }

Eigen::MatrixXd Agent::observation_column(std::span<const double> observation) const {
  require(observation.size() == std::size_t(config_.observation_dim),
          "select_action: observation length " + std::to_string(observation.size()) +
              " != " + std::to_string(config_.observation_dim));
  Eigen::MatrixXd col(config_.observation_dim, 1);
  for (int i = 0; i < config_.observation_dim; ++i) col(i, 0) = observation[std::size_t(i)];
  return col;
}

void Agent::save(ArchiveWriter& out) const {
  out.text("agent", algorithm_name(algorithm()));
  out.unsigned_integer("updates", update_count_);
  save_body(out);
}

void Agent::load(ArchiveReader& in) {
  const std::string stored = in.text("agent");
  if (stored != algorithm_name(algorithm())) {
    throw FormatError("checkpoint holds a '" + stored + "' agent, expected '" +
                      std::string(algorithm_name(algorithm())) + "'");
  }
  load_after_header(in);
}

void Agent::load_after_header(ArchiveReader& in) {
  update_count_ = in.unsigned_integer("updates");
  load_body(in);
}

std::unique_ptr<Agent> make_agent(Algorithm algorithm, const AgentConfig& config,
                                  CounterRng& init) {
  switch (algorithm) {
    case Algorithm::Ddpg: return std::make_unique<DdpgAgent>(config, init);
    case Algorithm::Td3: return std::make_unique<Td3Agent>(config, init);
    case Algorithm::Sac: return std::make_unique<SacAgent>(config, init);
  }
  throw ContractViolation("make_agent: unknown algorithm");
}

Eigen::VectorXd td_target(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                          const Eigen::VectorXd& next_q, double gamma) {
  return rewards.array() + gamma * (1.0 - dones.array()) * next_q.array();
}

Eigen::VectorXd twin_min_target(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                                const Eigen::VectorXd& next_q1, const Eigen::VectorXd& next_q2,
                                double gamma) {
  return td_target(rewards, dones, next_q1.cwiseMin(next_q2), gamma);
}

Eigen::VectorXd soft_target(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                            const Eigen::VectorXd& next_min_q, const Eigen::VectorXd& next_log_prob,
                            double alpha, double gamma) {
  return td_target(rewards, dones, next_min_q - alpha * next_log_prob, gamma);
}

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) {
  require(states.cols() == actions.cols(), "critic_input: batch size mismatch");
  Eigen::MatrixXd in(states.rows() + actions.rows(), states.cols());
  in.topRows(states.rows()) = states;
  in.bottomRows(actions.rows()) = actions;
  return in;
}

DenseNet make_actor(const AgentConfig& config, int outputs, Activation output, CounterRng& init) {
  std::vector<int> sizes{config.observation_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(outputs);
  return DenseNet::mlp(sizes, Activation::Relu, output, init, config.final_layer_init);
}

DenseNet make_critic(const AgentConfig& config, CounterRng& init) {
  std::vector<int> sizes{config.observation_dim + config.action_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  return DenseNet::mlp(sizes, Activation::Relu, Activation::Identity, init);
}

double regress_critic(DenseNet& critic, numkit::AdamState& opt, const Eigen::MatrixXd& input,
                      const Eigen::VectorXd& targets, double lr) {
  const auto cache = critic.forward_cached(input);
  const Eigen::RowVectorXd err = cache.result().row(0) - targets.transpose();
  const double n = static_cast<double>(err.size());
  const double loss = err.squaredNorm() / n;
  if (!std::isfinite(loss)) throw NumericFault("critic update: non-finite loss");
  const auto grads = numkit::backward(critic, cache, (2.0 / n) * err);
  numkit::adam_step(critic, grads.grads, opt, lr);
  return loss;
}

}  // namespace valvebench::agents
