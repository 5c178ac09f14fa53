#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "valvebench/agents/batch.hpp"
#include "valvebench/common/archive.hpp"
#include "valvebench/common/rng.hpp"
#include "valvebench/numkit/adam.hpp"
#include "valvebench/numkit/dense_net.hpp"

namespace valvebench::agents {

enum class Algorithm { Ddpg, Td3, Sac };

std::string_view algorithm_name(Algorithm a);  // "ddpg", "td3", "sac"
Algorithm algorithm_from_string(std::string_view name);

struct AgentConfig {
  int observation_dim = 19;
  int action_dim = 9;
  std::vector<int> hidden{256, 256};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  double tau = 0.005;
  double final_layer_init = 3e-3;

  // TD3
  int policy_delay = 2;
  double target_noise_sigma = 0.2;
  double target_noise_clip = 0.5;
  // DDPG and TD3
  double exploration_noise_sigma = 0.1;

  // SAC
  double initial_alpha = 1.0;
  double alpha_lr = 1e-3;
  /// Defaults to -action_dim when left unset.
  std::optional<double> target_entropy;
  double log_std_min = -20.0;
  double log_std_max = 2.0;

  double resolved_target_entropy() const {
    return target_entropy.value_or(-static_cast<double>(action_dim));
  }
  void validate() const;
};

enum class ActionMode { Explore, Greedy };

struct UpdateStats {
  double critic_loss = 0.0;
  std::optional<double> actor_loss;
  std::optional<double> alpha_loss;
};

/// Common surface of the three actor-critic learners.
class Agent {
 public:
  explicit Agent(AgentConfig config);
  virtual ~Agent() = default;

  virtual Algorithm algorithm() const = 0;
  /// Always returns act_dim values in [-1, 1].
  virtual std::vector<double> select_action(std::span<const double> observation, ActionMode mode,
                                            CounterRng& noise) const = 0;
  /// One gradient update on the batch; `noise` feeds target smoothing / sampling.
  virtual UpdateStats update(const Batch& batch, CounterRng& noise) = 0;
  virtual std::uint64_t parameter_checksum() const = 0;

  void save(ArchiveWriter& out) const;
  /// Throws FormatError if the archive holds a different algorithm.
  void load(ArchiveReader& in);
  /// Same as load() for callers that already consumed the `agent` record.
  void load_after_header(ArchiveReader& in);

  const AgentConfig& config() const { return config_; }
  std::uint64_t update_count() const { return update_count_; }

 protected:
  virtual void save_body(ArchiveWriter& out) const = 0;
  virtual void load_body(ArchiveReader& in) = 0;
  Eigen::MatrixXd observation_column(std::span<const double> observation) const;

  AgentConfig config_;
  std::uint64_t update_count_ = 0;
};

std::unique_ptr<Agent> make_agent(Algorithm algorithm, const AgentConfig& config,
                                  CounterRng& init);

// Bootstrap targets, vectorized over a batch.
Eigen::VectorXd td_target(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                          const Eigen::VectorXd& next_q, double gamma);
Eigen::VectorXd twin_min_target(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                                const Eigen::VectorXd& next_q1, const Eigen::VectorXd& next_q2,
                                double gamma);
Eigen::VectorXd soft_target(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                            const Eigen::VectorXd& next_min_q, const Eigen::VectorXd& next_log_prob,
                            double alpha, double gamma);

/// Stacks states over actions: the critic input.
Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions);

/// Builds actor (tanh output, small final layer) and critic nets.
numkit::DenseNet make_actor(const AgentConfig& config, int outputs, numkit::Activation output,
                            CounterRng& init);
numkit::DenseNet make_critic(const AgentConfig& config, CounterRng& init);

/// Mean-squared-error regression step on one critic. Returns the loss.
double regress_critic(numkit::DenseNet& critic, numkit::AdamState& opt, const Eigen::MatrixXd& input,
                      const Eigen::VectorXd& targets, double lr);

}  // namespace valvebench::agents
