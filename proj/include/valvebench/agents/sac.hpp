#pragma once

#include "valvebench/agents/agent.hpp"

namespace valvebench::agents {

/// Reparameterized draw from the tanh-squashed Gaussian policy.
struct SquashedSample {
  Eigen::MatrixXd action;    // act_dim x B, tanh(pre_tanh)
  Eigen::MatrixXd pre_tanh;  // mean + std * noise
  Eigen::MatrixXd noise;     // standard normal draws
  Eigen::MatrixXd std_dev;
  Eigen::VectorXd log_prob;  // B
};

/// log N(u; mean, std) - sum log(1 - tanh(u)^2), summed over action dims.
/// The correction uses the overflow-safe form 2 (log 2 - u - softplus(-2u)).
Eigen::VectorXd squashed_log_prob(const Eigen::MatrixXd& pre_tanh, const Eigen::MatrixXd& mean,
                                  const Eigen::MatrixXd& log_std);

/// Soft actor-critic with twin critics and automatic temperature tuning.
class SacAgent final : public Agent {
 public:
  SacAgent(const AgentConfig& config, CounterRng& init);

  Algorithm algorithm() const override { return Algorithm::Sac; }
  std::vector<double> select_action(std::span<const double> observation, ActionMode mode,
                                    CounterRng& noise) const override;
  UpdateStats update(const Batch& batch, CounterRng& noise) override;
  std::uint64_t parameter_checksum() const override;

  /// Splits the actor output into mean and clamped log-std.
  void policy_heads(const Eigen::MatrixXd& actor_out, Eigen::MatrixXd& mean,
                    Eigen::MatrixXd& log_std) const;
  SquashedSample sample(const Eigen::MatrixXd& states, CounterRng& noise) const;

  double alpha() const;
  double log_alpha() const { return log_alpha_; }
  void set_log_alpha(double v) { log_alpha_ = v; }

  numkit::DenseNet& actor() { return actor_; }
  numkit::DenseNet& critic1() { return critic1_; }
  numkit::DenseNet& critic2() { return critic2_; }
  numkit::DenseNet& critic1_target() { return critic1_target_; }
  numkit::DenseNet& critic2_target() { return critic2_target_; }

 private:
  void save_body(ArchiveWriter& out) const override;
  void load_body(ArchiveReader& in) override;

  numkit::DenseNet actor_;
  numkit::DenseNet critic1_, critic1_target_, critic2_, critic2_target_;
  numkit::AdamState actor_opt_, critic1_opt_, critic2_opt_;
  double log_alpha_ = 0.0;
  numkit::ScalarAdam alpha_opt_;
};

}  // namespace valvebench::agents
