#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>
#include <vector>

#include "valvebench/common/archive.hpp"
#include "valvebench/common/rng.hpp"

namespace valvebench::numkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Relu, Tanh, Identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::Identity;
};

/// Per-layer parameter gradients, shape-congruent with a DenseNet.
struct GradientSet {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double factor);
  bool all_finite() const;
  double max_abs() const;
};

/// Activations of every layer from a batched forward pass. Columns are samples.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> outputs;  // post-activation, one per layer

  const Matrix& result() const { return outputs.back(); }
};

struct BackwardResult {
  GradientSet grads;
  Matrix input_grad;  // input_dim x batch
};

/// Multilayer perceptron with per-layer activation. All math is float64.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<Layer> layers);

  /// Fully connected net with the given layer widths (sizes.front() is the
  /// input). Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the
  /// final layer uses U(-final_scale, final_scale) when final_scale > 0.
  static DenseNet mlp(const std::vector<int>& sizes, Activation hidden, Activation output,
                      CounterRng& rng, double final_scale = 0.0);

  int input_dim() const;
  int output_dim() const;
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t parameter_count() const;

  Vector forward(const Vector& x) const;
  Matrix forward(const Matrix& batch) const;
  ForwardCache forward_cached(const Matrix& batch) const;

  GradientSet zero_gradients() const;
  bool same_shape(const DenseNet& other) const;
  bool same_shape(const GradientSet& grads) const;

  /// FNV-1a over the parameter bits.
  std::uint64_t checksum() const;

  void save(ArchiveWriter& out, std::string_view name) const;
  static DenseNet load(ArchiveReader& in, std::string_view name);

 private:
  std::vector<Layer> layers_;
};

/// Reverse-mode gradients of sum(upstream .* output) w.r.t. every parameter
/// and the input. `upstream` is output_dim x batch. With want_params=false
/// only the input gradient is produced (grads stays empty).
BackwardResult backward(const DenseNet& net, const ForwardCache& cache, const Matrix& upstream,
                        bool want_params = true);

/// Single-sample convenience overload.
BackwardResult backward(const DenseNet& net, const Vector& x, const Vector& upstream);

/// target <- (1 - tau) * target + tau * source, for every parameter.
void soft_update(DenseNet& target, const DenseNet& source, double tau);

}  // namespace valvebench::numkit
