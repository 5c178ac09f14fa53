#pragma once

#include "valvebench/agents/agent.hpp"

namespace valvebench::agents {

class DdpgAgent final : public Agent {
 public:
  DdpgAgent(const AgentConfig& config, CounterRng& init);

  Algorithm algorithm() const override { return Algorithm::Ddpg; }
  std::vector<double> select_action(std::span<const double> observation, ActionMode mode,
                                    CounterRng& noise) const override;
  UpdateStats update(const Batch& batch, CounterRng& noise) override;
  std::uint64_t parameter_checksum() const override;

  numkit::DenseNet& actor() { return actor_; }
  numkit::DenseNet& critic() { return critic_; }
  numkit::DenseNet& actor_target() { return actor_target_; }
  numkit::DenseNet& critic_target() { return critic_target_; }

 private:
  void save_body(ArchiveWriter& out) const override;
  void load_body(ArchiveReader& in) override;

  numkit::DenseNet actor_, actor_target_;
  numkit::DenseNet critic_, critic_target_;
  numkit::AdamState actor_opt_, critic_opt_;
};

}  // namespace valvebench::agents
