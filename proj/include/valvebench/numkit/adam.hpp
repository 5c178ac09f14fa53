#pragma once

#include <cstdint>
#include <string_view>

#include "valvebench/numkit/dense_net.hpp"

namespace valvebench::numkit {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moments for every parameter of one network.
struct AdamState {
  GradientSet m;
  GradientSet v;
  std::uint64_t t = 0;
  AdamConfig config;

  static AdamState for_net(const DenseNet& net, AdamConfig config = {});

  void save(ArchiveWriter& out, std::string_view name) const;
  static AdamState load(ArchiveReader& in, std::string_view name, const DenseNet& net);
};

/// Bias-corrected Adam step applied in place. Throws NumericFault (leaving
/// params and state untouched) if any gradient is non-finite.
void adam_step(DenseNet& params, const GradientSet& grads, AdamState& state, double lr);

/// Adam for a single scalar parameter (used for the SAC temperature).
struct ScalarAdam {
  double m = 0.0;
  double v = 0.0;
  std::uint64_t t = 0;
  AdamConfig config;

  void step(double& param, double grad, double lr);
};

}  // namespace valvebench::numkit
