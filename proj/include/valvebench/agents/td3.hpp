#pragma once

#include "valvebench/agents/agent.hpp"

namespace valvebench::agents {

/// Twin critics with clipped double-Q targets, target policy smoothing and
/// delayed actor/target updates.
class Td3Agent final : public Agent {
 public:
  Td3Agent(const AgentConfig& config, CounterRng& init);

  Algorithm algorithm() const override { return Algorithm::Td3; }
  std::vector<double> select_action(std::span<const double> observation, ActionMode mode,
                                    CounterRng& noise) const override;
  UpdateStats update(const Batch& batch, CounterRng& noise) override;
  /// Update with an explicit 1-based index; the actor and all targets move
  /// only when update_index % policy_delay == 0.
  UpdateStats update_at(const Batch& batch, std::uint64_t update_index, CounterRng& noise);
  std::uint64_t parameter_checksum() const override;

  /// Smoothed target action for next states.
  Eigen::MatrixXd target_action(const Eigen::MatrixXd& next_states, CounterRng& noise) const;

  numkit::DenseNet& actor() { return actor_; }
  numkit::DenseNet& critic1() { return critic1_; }
  numkit::DenseNet& critic2() { return critic2_; }
  numkit::DenseNet& actor_target() { return actor_target_; }
  numkit::DenseNet& critic1_target() { return critic1_target_; }
  numkit::DenseNet& critic2_target() { return critic2_target_; }

 private:
  void save_body(ArchiveWriter& out) const override;
  void load_body(ArchiveReader& in) override;

  numkit::DenseNet actor_, actor_target_;
  numkit::DenseNet critic1_, critic1_target_, critic2_, critic2_target_;
  numkit::AdamState actor_opt_, critic1_opt_, critic2_opt_;
};

}  // namespace valvebench::agents
