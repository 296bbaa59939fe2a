#pragma once

// Independent reference implementations used as test oracles. The oracles
// never call the library's forward pass, gamma evaluators or coefficient
// expansion; only the comparison helpers at the bottom call code under test.

#include "tglo/loss_core.hpp"
#include "tglo/loss_spec.hpp"
#include "tglo/network.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace oracle {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  tglo::LossParamsd lambda(double scale = 2.0) {
    tglo::LossParamsd p;
    for (int i = 0; i < 8; ++i) p[i] = uniform(-scale, scale);
    return p;
  }

  tglo::GammaCoeffsd coeffs(double scale = 5.0) {
    return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale),
            uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// The Taylor loss polynomial itself (not its derivative), term by term.
inline double taylor_polynomial(const tglo::LossParamsd& p, double h, double y) {
  const double dh = h - p[1], dy = y - p[0];
  return p[2] * dh + p[3] * dh * dh + p[4] * dh * dh * dh + p[5] * dy * dh + p[6] * dy * dh * dh +
         p[7] * dy * dy * dh;
}

/// d/dh of the Taylor polynomial by a five-point stencil, exact for quartics.
inline double taylor_gamma_stencil(const tglo::LossParamsd& p, double h, double y) {
  const double d = 0.25;
  auto f = [&](double t) { return taylor_polynomial(p, t, y); };
  return (-f(h + 2 * d) + 8 * f(h + d) - 8 * f(h - d) + f(h - 2 * d)) / (12 * d);
}

enum class Loss { mse, ce, taylor, baikal };

/// Explicit per-sample losses whose negative h-derivative is the learning
/// rule's gamma, averaged over the n outputs.
inline double explicit_loss(Loss kind, const Eigen::VectorXd& h, const Eigen::VectorXd& y,
                            const tglo::LossParamsd& p = {}) {
  double total = 0;
  for (Eigen::Index k = 0; k < h.size(); ++k) {
    switch (kind) {
      case Loss::mse: total += (h(k) - y(k)) * (h(k) - y(k)); break;
      case Loss::ce: total += -y(k) * std::log(h(k)); break;
      case Loss::taylor: total += -taylor_polynomial(p, h(k), y(k)); break;
      case Loss::baikal: total += -(std::log(h(k)) - y(k) / h(k)); break;
    }
  }
  return total / double(h.size());
}

/// Plain-loop forward pass over a flat parameter vector laid out per layer as
/// column-major weights followed by the bias.
inline Eigen::VectorXd forward(const std::vector<int>& sizes, const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
  std::vector<double> a(x.data(), x.data() + x.size());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    std::vector<double> z(out, 0.0);
    for (int c = 0; c < in; ++c)
      for (int r = 0; r < out; ++r) z[r] += theta(at + c * out + r) * a[c];
    at += in * out;
    for (int r = 0; r < out; ++r) z[r] += theta(at + r);
    at += out;
    if (l + 2 < sizes.size())
      for (double& v : z) v = std::tanh(v);
    a = std::move(z);
  }
  double top = a[0];
  for (double v : a) top = std::max(top, v);
  double sum = 0;
  for (double& v : a) sum += (v = std::exp(v - top));
  Eigen::VectorXd h(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) h(k) = a[k] / sum;
  return h;
}

/// Relative error with an absolute floor so near-zero references do not blow up.
inline double rel_error(double got, double want, double floor = 1e-8) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

struct StepCheck {
  double worst_rel_error = 0;
  int coordinates = 0;
  bool applied = false;
};

/// Compares one decomposed step on a random 2-3-2 net against -eta times the
/// central-difference gradient of the explicit loss, coordinate by coordinate.
inline StepCheck step_vs_finite_difference(Loss kind, const tglo::LossSpec& loss, std::uint64_t seed) {
  const std::vector<int> sizes{2, 3, 2};
  Rng rng(seed);
  tglo::Network net = tglo::Network::random(sizes, seed);
  // Nonzero biases so every coordinate carries signal.
  Eigen::VectorXd theta = net.parameters();
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += rng.uniform(-0.5, 0.5);
  net.set_parameters(theta);

  const Eigen::Vector2d x(rng.uniform(-1, 1), rng.uniform(-1, 1));
  const int label = rng.integer(0, 1);
  const Eigen::VectorXd y = loss.targets(label, 2);
  const double eta = 0.01;

  StepCheck out;
  out.applied = tglo::decomposed_step(net, x, label, loss, eta).applied;
  if (!out.applied) return out;
  const Eigen::VectorXd delta = net.parameters() - theta;

  const double step = 1e-5;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd up = theta, down = theta;
    up(i) += step;
    down(i) -= step;
    const double fd = (explicit_loss(kind, forward(sizes, up, x), y, loss.params) -
                       explicit_loss(kind, forward(sizes, down, x), y, loss.params)) /
                      (2 * step);
    out.worst_rel_error = std::max(out.worst_rel_error, rel_error(delta(i), -eta * fd, 1e-9));
    ++out.coordinates;
  }
  return out;
}

}  // namespace oracle
