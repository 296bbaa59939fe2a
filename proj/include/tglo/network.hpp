#pragma once

// Dense feedforward classifier: tanh hidden layers and a terminal softmax.
// Training goes through the decomposed rule, so backpropagation starts from a
// vector of per-output coefficients rather than from a loss value.

#include "tglo/loss_spec.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tglo {

template <typename Scalar>
class BasicNetwork {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weights;  ///< fan_out x fan_in
    Vector bias;
  };

  /// Activations recorded by forward(); activations[0] is the input.
  struct Cache {
    std::vector<Vector> activations;
    Vector logits;  ///< raw softmax inputs
    Vector output;  ///< scaled logits
  };

  BasicNetwork() = default;

  /// All-zero network; its output is uniform for every input.
  explicit BasicNetwork(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("network needs at least input and output layers");
    for (int s : sizes_)
      if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
    if (sizes_.back() < 2) throw std::invalid_argument("network needs at least 2 outputs");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
      layers_.push_back({Matrix::Zero(sizes_[l + 1], sizes_[l]), Vector::Zero(sizes_[l + 1])});
  }

  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  static BasicNetwork random(std::vector<int> layer_sizes, std::uint64_t seed) {
    BasicNetwork net(std::move(layer_sizes));
    std::mt19937_64 rng(seed);
    for (Layer& layer : net.layers_) {
      const Scalar bound = Scalar(1) / std::sqrt(Scalar(layer.weights.cols()));
      std::uniform_real_distribution<double> dist(-double(bound), double(bound));
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = Scalar(dist(rng));
    }
    return net;
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Eigen::Index parameter_count() const {
    Eigen::Index count = 0;
    for (const Layer& l : layers_) count += l.weights.size() + l.bias.size();
    return count;
  }

  /// Flat view: per layer, column-major weights followed by bias.
  Vector parameters() const {
    Vector out(parameter_count());
    Eigen::Index at = 0;
    for (const Layer& l : layers_) {
      out.segment(at, l.weights.size()) = l.weights.reshaped();
      at += l.weights.size();
      out.segment(at, l.bias.size()) = l.bias;
      at += l.bias.size();
    }
    return out;
  }

  void set_parameters(const Vector& flat) {
    if (flat.size() != parameter_count()) throw std::invalid_argument("parameter vector has wrong length");
    Eigen::Index at = 0;
    for (Layer& l : layers_) {
      l.weights.reshaped() = flat.segment(at, l.weights.size());
      at += l.weights.size();
      l.bias = flat.segment(at, l.bias.size());
      at += l.bias.size();
    }
  }

  bool all_finite() const {
    for (const Layer& l : layers_)
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

  Cache forward(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != input_size())
      throw std::invalid_argument("input has dimension " + std::to_string(x.size()) + ", network expects " +
                                  std::to_string(input_size()));
    Cache cache;
    cache.activations.reserve(layers_.size());
    cache.activations.push_back(x);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Vector z = layers_[l].weights * cache.activations.back() + layers_[l].bias;
      if (l + 1 < layers_.size()) {
        cache.activations.push_back(z.array().tanh().matrix());
      } else {
        cache.logits = std::move(z);
      }
    }
    cache.output = softmax(cache.logits);
    return cache;
  }

  Vector predict(const Eigen::Ref<const Vector>& x) const { return forward(x).output; }

  int classify(const Eigen::Ref<const Vector>& x) const {
    Eigen::Index best;
    predict(x).maxCoeff(&best);
    return static_cast<int>(best);
  }

  static Vector softmax(const Vector& f) {
    const Vector z = (f.array() - f.maxCoeff()).exp().matrix();
    return z / z.sum();
  }

  friend bool operator==(const BasicNetwork& a, const BasicNetwork& b) {
    if (a.sizes_ != b.sizes_) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l)
      if (a.layers_[l].weights != b.layers_[l].weights || a.layers_[l].bias != b.layers_[l].bias) return false;
    return true;
  }

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

using Network = BasicNetwork<double>;

/// Gradient of sum_k coeff_k * h_k with respect to every parameter and the input.
template <typename Scalar>
struct OutputGradient {
  std::vector<typename BasicNetwork<Scalar>::Matrix> weights;
  std::vector<typename BasicNetwork<Scalar>::Vector> biases;
  typename BasicNetwork<Scalar>::Vector input;

  bool all_finite() const {
    for (const auto& w : weights)
      if (!w.allFinite()) return false;
    for (const auto& b : biases)
      if (!b.allFinite()) return false;
    return input.allFinite();
  }
};

/// Backpropagates the output coefficients through softmax and the hidden layers.
template <typename Scalar>
OutputGradient<Scalar> backprop_output_coefficients(const BasicNetwork<Scalar>& net,
                                                   const typename BasicNetwork<Scalar>::Cache& cache,
                                                   const typename BasicNetwork<Scalar>::Vector& coeffs) {
  using Vector = typename BasicNetwork<Scalar>::Vector;
  const auto& layers = net.layers();
  const Vector& h = cache.output;
  // d/df_j sum_k g_k h_k = h_j (g_j - g.h)
  Vector delta = (h.array() * (coeffs.array() - coeffs.dot(h))).matrix();

  OutputGradient<Scalar> grad;
  grad.weights.resize(layers.size());
  grad.biases.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Vector& below = cache.activations[l];
    grad.weights[l] = delta * below.transpose();
    grad.biases[l] = delta;
    Vector up = layers[l].weights.transpose() * delta;
    if (l > 0) {
      delta = (up.array() * (Scalar(1) - below.array().square())).matrix();
    } else {
      grad.input = std::move(up);
    }
  }
  return grad;
}

struct StepResult {
  bool applied = false;
  Eigen::VectorXd output;  ///< scaled logits before the update
  Eigen::VectorXd gammas;
};

/// Per-output coefficients gamma_k / n of the decomposed rule.
inline Eigen::VectorXd rule_coefficients(const Eigen::VectorXd& output, int label, const LossSpec& loss) {
  return loss.gammas(output, label) / double(output.size());
}

/// theta += eta * (1/n) sum_k gamma_k dh_k/dtheta for one sample. Skipped,
/// leaving the network untouched, when any gamma or update is non-finite.
inline StepResult decomposed_step(Network& net, const Eigen::Ref<const Eigen::VectorXd>& x, int label,
                                  const LossSpec& loss, double eta) {
  const auto cache = net.forward(x);
  StepResult result;
  result.output = cache.output;
  result.gammas = loss.gammas(cache.output, label);
  if (!result.gammas.allFinite()) return result;
  const auto grad = backprop_output_coefficients(net, cache, Eigen::VectorXd(result.gammas / double(net.output_size())));
  if (!grad.all_finite()) return result;
  auto updated = net.layers();
  for (std::size_t l = 0; l < updated.size(); ++l) {
    updated[l].weights += eta * grad.weights[l];
    updated[l].bias += eta * grad.biases[l];
    if (!updated[l].weights.allFinite() || !updated[l].bias.allFinite()) return result;
  }
  net.layers() = std::move(updated);
  result.applied = true;
  return result;
}

/// Gradient of the training loss with respect to the input features, i.e.
/// -(1/n) sum_k gamma_k dh_k/dx.
inline Eigen::VectorXd input_gradient(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x, int label,
                                      const LossSpec& loss) {
  const auto cache = net.forward(x);
  const Eigen::VectorXd coeffs = rule_coefficients(cache.output, label, loss);
  return -backprop_output_coefficients(net, cache, coeffs).input;
}

}  // namespace tglo
