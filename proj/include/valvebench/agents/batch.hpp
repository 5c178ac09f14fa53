#pragma once

#include <Eigen/Dense>

namespace valvebench::agents {

/// Minibatch in column-per-sample layout.
struct Batch {
  Eigen::MatrixXd states;       // obs_dim x B
  Eigen::MatrixXd actions;      // act_dim x B
  Eigen::VectorXd rewards;      // B
  Eigen::MatrixXd next_states;  // obs_dim x B
  Eigen::VectorXd dones;        // B, 1.0 for goal-reached terminals

  Eigen::Index size() const { return rewards.size(); }
};

}  // namespace valvebench::agents
