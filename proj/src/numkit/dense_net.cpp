#include "valvebench/numkit/dense_net.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "valvebench/common/errors.hpp"

namespace valvebench::numkit {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

namespace {

void apply_activation(Matrix& z, Activation a) {
  switch (a) {
    case Activation::Relu: z = z.cwiseMax(0.0); break;
    case Activation::Tanh: z = z.array().tanh().matrix(); break;
    case Activation::Identity: break;
  }
}

// Derivative of the activation expressed through its output.
void scale_by_derivative(Matrix& delta, const Matrix& out, Activation a) {
  switch (a) {
    case Activation::Relu:
      delta.array() *= (out.array() > 0.0).cast<double>();
      break;
    case Activation::Tanh:
      delta.array() *= 1.0 - out.array().square();
      break;
    case Activation::Identity: break;
  }
}

std::uint64_t fnv_mix(std::uint64_t h, double value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof bits);
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xFFu;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void write_matrix(ArchiveWriter& out, std::string_view tag, const Matrix& m) {
  // Row-major order on disk regardless of Eigen's storage order.
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  out.values(tag, flat);
}

void read_matrix(ArchiveReader& in, std::string_view tag, Matrix& m) {
  std::vector<double> flat(static_cast<std::size_t>(m.size()));
  in.values_into(tag, flat);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat[k++];
}

}  // namespace

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  require(weight.size() == other.weight.size(), "GradientSet: layer count mismatch");
  for (std::size_t k = 0; k < weight.size(); ++k) {
    weight[k] += other.weight[k];
    bias[k] += other.bias[k];
  }
  return *this;
}

GradientSet& GradientSet::operator*=(double factor) {
  for (std::size_t k = 0; k < weight.size(); ++k) {
    weight[k] *= factor;
    bias[k] *= factor;
  }
  return *this;
}

bool GradientSet::all_finite() const {
  for (std::size_t k = 0; k < weight.size(); ++k) {
    if (!weight[k].allFinite() || !bias[k].allFinite()) return false;
  }
  return true;
}

double GradientSet::max_abs() const {
  double m = 0.0;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    if (weight[k].size() > 0) m = std::max(m, weight[k].cwiseAbs().maxCoeff());
    if (bias[k].size() > 0) m = std::max(m, bias[k].cwiseAbs().maxCoeff());
  }
  return m;
}

DenseNet::DenseNet(std::vector<Layer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), "DenseNet: at least one layer required");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    require(l.weight.rows() > 0 && l.weight.cols() > 0, "DenseNet: empty layer");
    require(l.bias.size() == l.weight.rows(), "DenseNet: bias length must equal layer output dim");
    if (k > 0) {
      require(layers_[k - 1].weight.rows() == l.weight.cols(),
              "DenseNet: layer " + std::to_string(k) + " input dim does not chain");
    }
  }
}

DenseNet DenseNet::mlp(const std::vector<int>& sizes, Activation hidden, Activation output,
                       CounterRng& rng, double final_scale) {
  require(sizes.size() >= 2, "DenseNet::mlp: need input and output sizes");
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const int in = sizes[k];
    const int out = sizes[k + 1];
    require(in > 0 && out > 0, "DenseNet::mlp: sizes must be positive");
    const bool last = k + 2 == sizes.size();
    const double bound = (last && final_scale > 0.0) ? final_scale : 1.0 / std::sqrt(double(in));
    Layer layer{Matrix(out, in), Vector(out), last ? output : hidden};
    // Row-major fill order keeps initialization independent of Eigen layout.
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    for (int r = 0; r < out; ++r) layer.bias(r) = rng.uniform(-bound, bound);
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

int DenseNet::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DenseNet::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Vector DenseNet::forward(const Vector& x) const {
  require(x.size() == input_dim(), "DenseNet::forward: expected input of length " +
                                       std::to_string(input_dim()) + ", got " +
                                       std::to_string(x.size()));
  Matrix a = x;
  for (const auto& l : layers_) {
    Matrix z = l.weight * a + l.bias;
    apply_activation(z, l.activation);
    a = std::move(z);
  }
  return a.col(0);
}

Matrix DenseNet::forward(const Matrix& batch) const {
  require(batch.rows() == input_dim(), "DenseNet::forward: batch row count must equal input dim");
  Matrix a = batch;
  for (const auto& l : layers_) {
    Matrix z(l.weight.rows(), a.cols());
    z.noalias() = l.weight * a;
    z.colwise() += l.bias;
    apply_activation(z, l.activation);
    a = std::move(z);
  }
  return a;
}

ForwardCache DenseNet::forward_cached(const Matrix& batch) const {
  require(batch.rows() == input_dim(), "DenseNet::forward: batch row count must equal input dim");
  ForwardCache cache;
  cache.input = batch;
  cache.outputs.reserve(layers_.size());
  const Matrix* a = &cache.input;
  for (const auto& l : layers_) {
    Matrix z(l.weight.rows(), a->cols());
    z.noalias() = l.weight * *a;
    z.colwise() += l.bias;
    apply_activation(z, l.activation);
    cache.outputs.push_back(std::move(z));
    a = &cache.outputs.back();
  }
  return cache;
}

GradientSet DenseNet::zero_gradients() const {
  GradientSet g;
  for (const auto& l : layers_) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

bool DenseNet::same_shape(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].weight.rows() != other.layers_[k].weight.rows() ||
        layers_[k].weight.cols() != other.layers_[k].weight.cols())
      return false;
  }
  return true;
}

bool DenseNet::same_shape(const GradientSet& grads) const {
  if (layers_.size() != grads.weight.size() || layers_.size() != grads.bias.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].weight.rows() != grads.weight[k].rows() ||
        layers_[k].weight.cols() != grads.weight[k].cols() ||
        layers_[k].bias.size() != grads.bias[k].size())
      return false;
  }
  return true;
}

std::uint64_t DenseNet::checksum() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) h = fnv_mix(h, l.weight.data()[i]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) h = fnv_mix(h, l.bias[i]);
  }
  return h;
}

void DenseNet::save(ArchiveWriter& out, std::string_view name) const {
  out.text("net", std::string(name) + " " + std::to_string(layers_.size()));
  for (const auto& l : layers_) {
    out.text("layer", std::to_string(l.weight.rows()) + " " + std::to_string(l.weight.cols()) +
                          " " + std::string(to_string(l.activation)));
    write_matrix(out, "W", l.weight);
    out.values("b", std::span<const double>(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
  }
}

DenseNet DenseNet::load(ArchiveReader& in, std::string_view name) {
  const auto head = in.record("net");
  if (head.size() != 2 || head[0] != name) {
    throw FormatError("checkpoint: expected net '" + std::string(name) + "'");
  }
  const auto count = parse_uint(head[1]);
  std::vector<Layer> layers;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto shape = in.record("layer");
    if (shape.size() != 3) throw FormatError("checkpoint: malformed layer record");
    const auto rows = static_cast<Eigen::Index>(parse_uint(shape[0]));
    const auto cols = static_cast<Eigen::Index>(parse_uint(shape[1]));
    Layer l{Matrix(rows, cols), Vector(rows), activation_from_string(shape[2])};
    read_matrix(in, "W", l.weight);
    in.values_into("b", std::span<double>(l.bias.data(), static_cast<std::size_t>(rows)));
    layers.push_back(std::move(l));
  }
  return DenseNet(std::move(layers));
}

BackwardResult backward(const DenseNet& net, const ForwardCache& cache, const Matrix& upstream,
                        bool want_params) {
  const auto& layers = net.layers();
  require(cache.outputs.size() == layers.size(), "backward: cache does not belong to this net");
  require(upstream.rows() == net.output_dim() && upstream.cols() == cache.input.cols(),
          "backward: upstream must be output_dim x batch");
  BackwardResult result;
  if (want_params) {
    result.grads.weight.resize(layers.size());
    result.grads.bias.resize(layers.size());
  }
  Matrix delta = upstream;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& l = layers[k];
    scale_by_derivative(delta, cache.outputs[k], l.activation);
    const Matrix& below = k == 0 ? cache.input : cache.outputs[k - 1];
    if (want_params) {
      result.grads.weight[k].noalias() = delta * below.transpose();
      result.grads.bias[k] = delta.rowwise().sum();
    }
    Matrix next(l.weight.cols(), delta.cols());
    next.noalias() = l.weight.transpose() * delta;
    delta = std::move(next);
  }
  result.input_grad = std::move(delta);
  return result;
}

BackwardResult backward(const DenseNet& net, const Vector& x, const Vector& upstream) {
  require(x.size() == net.input_dim(), "backward: input length must equal input dim");
  require(upstream.size() == net.output_dim(), "backward: upstream length must equal output dim");
  const auto cache = net.forward_cached(Matrix(x));
  return backward(net, cache, Matrix(upstream));
}

void soft_update(DenseNet& target, const DenseNet& source, double tau) {
  require(target.same_shape(source), "soft_update: target and source shapes differ");
  require(tau > 0.0 && tau <= 1.0, "soft_update: tau must lie in (0, 1]");
  auto& dst = target.layers();
  const auto& src = source.layers();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    if (tau == 1.0) {
      dst[k].weight = src[k].weight;
      dst[k].bias = src[k].bias;
    } else {
      dst[k].weight = (1.0 - tau) * dst[k].weight + tau * src[k].weight;
      dst[k].bias = (1.0 - tau) * dst[k].bias + tau * src[k].bias;
    }
  }
}

}  // namespace valvebench::numkit
