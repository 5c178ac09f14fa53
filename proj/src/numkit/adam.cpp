#include "valvebench/numkit/adam.hpp"

#include <cmath>
#include <string>

#include "valvebench/common/errors.hpp"

namespace valvebench::numkit {

AdamState AdamState::for_net(const DenseNet& net, AdamConfig config) {
  return AdamState{net.zero_gradients(), net.zero_gradients(), 0, config};
}

void adam_step(DenseNet& params, const GradientSet& grads, AdamState& state, double lr) {
  require(params.same_shape(grads), "adam_step: gradient shape does not match parameters");
  require(params.same_shape(state.m) && params.same_shape(state.v),
          "adam_step: optimizer state shape does not match parameters");
  require(lr > 0.0, "adam_step: learning rate must be positive");
  if (!grads.all_finite()) throw NumericFault("adam_step: non-finite gradient");

  const auto& c = state.config;
  state.t += 1;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  // m_hat / (sqrt(v_hat) + eps) with the corrections folded into scalars.
  const double step = lr / correction1;
  const double inv_sqrt_c2 = 1.0 / std::sqrt(correction2);
  auto& layers = params.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
      m = c.beta1 * m + (1.0 - c.beta1) * g;
      v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
      p.array() -= step * m.array() / (v.array().sqrt() * inv_sqrt_c2 + c.epsilon);
    };
    update(layers[k].weight, grads.weight[k], state.m.weight[k], state.v.weight[k]);
    update(layers[k].bias, grads.bias[k], state.m.bias[k], state.v.bias[k]);
  }
}

void ScalarAdam::step(double& param, double grad, double lr) {
  if (!std::isfinite(grad)) throw NumericFault("adam_step: non-finite gradient");
  t += 1;
  m = config.beta1 * m + (1.0 - config.beta1) * grad;
  v = config.beta2 * v + (1.0 - config.beta2) * grad * grad;
  const double m_hat = m / (1.0 - std::pow(config.beta1, static_cast<double>(t)));
  const double v_hat = v / (1.0 - std::pow(config.beta2, static_cast<double>(t)));
  param -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
}

namespace {

void write_moments(ArchiveWriter& out, const GradientSet& g, std::string_view prefix) {
  for (std::size_t k = 0; k < g.weight.size(); ++k) {
    const auto& w = g.weight[k];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    out.values(std::string(prefix) + "W", flat);
    out.values(std::string(prefix) + "b",
               std::span<const double>(g.bias[k].data(), static_cast<std::size_t>(g.bias[k].size())));
  }
}

void read_moments(ArchiveReader& in, GradientSet& g, std::string_view prefix) {
  for (std::size_t k = 0; k < g.weight.size(); ++k) {
    auto& w = g.weight[k];
    std::vector<double> flat(static_cast<std::size_t>(w.size()));
    in.values_into(std::string(prefix) + "W", flat);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[i++];
    in.values_into(std::string(prefix) + "b",
                   std::span<double>(g.bias[k].data(), static_cast<std::size_t>(g.bias[k].size())));
  }
}

}  // namespace

void AdamState::save(ArchiveWriter& out, std::string_view name) const {
  out.text("adam", std::string(name) + " " + std::to_string(t));
  write_moments(out, m, "m");
  write_moments(out, v, "v");
}

AdamState AdamState::load(ArchiveReader& in, std::string_view name, const DenseNet& net) {
  const auto head = in.record("adam");
  if (head.size() != 2 || head[0] != name) {
    throw FormatError("checkpoint: expected optimizer state '" + std::string(name) + "'");
  }
  AdamState state = for_net(net);
  state.t = parse_uint(head[1]);
  read_moments(in, state.m, "m");
  read_moments(in, state.v, "v");
  return state;
}

}  // namespace valvebench::numkit
