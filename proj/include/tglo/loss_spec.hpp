#pragma once

// Runtime selection of a gamma evaluator, used by training, tracing and
// attacks. Targets are one-hot unless label smoothing is requested explicitly.

#include "tglo/loss_core.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <sstream>
#include <string>
#include <string_view>

namespace tglo {

enum class LossKind { mse, cross_entropy, baikal, taylor, zero };

struct LossSpec {
  LossKind kind = LossKind::cross_entropy;
  LossParamsd params{};
  double logit_floor = kDefaultLogitFloor;
  /// 0 disables smoothing; otherwise must lie in (0, 1).
  double label_smoothing = 0.0;

  static LossSpec mse() { return {LossKind::mse}; }
  static LossSpec cross_entropy() { return {LossKind::cross_entropy}; }
  static LossSpec baikal() { return {LossKind::baikal}; }
  static LossSpec zero() { return {LossKind::zero}; }
  static LossSpec taylor(const LossParamsd& p) { return {LossKind::taylor, p}; }

  /// Gamma for one scaled logit h against target value y. Logits are clamped
  /// to logit_floor for the families that divide by h.
  double gamma(double h, double y) const {
    switch (kind) {
      case LossKind::mse:
        return gamma_mse(h, y);
      case LossKind::cross_entropy:
        return gamma_ce(std::max(h, logit_floor), y);
      case LossKind::baikal:
        return gamma_baikal(std::max(h, logit_floor), y);
      case LossKind::taylor:
        return gamma_taylor(params, h, y);
      case LossKind::zero:
        return 0.0;
    }
    return 0.0;
  }

  /// Target vector for `label` over `n` classes (smoothed if configured).
  Eigen::VectorXd targets(int label, int n) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    if (label_smoothing > 0.0) {
      const auto t = smoothed_targets(label_smoothing, n);
      y.setConstant(t.nontarget);
      y(label) = t.target;
    } else {
      y(label) = 1.0;
    }
    return y;
  }

  Eigen::VectorXd gammas(const Eigen::VectorXd& h, int label) const {
    const Eigen::VectorXd y = targets(label, static_cast<int>(h.size()));
    Eigen::VectorXd g(h.size());
    for (Eigen::Index k = 0; k < h.size(); ++k) g(k) = gamma(h(k), y(k));
    return g;
  }

  std::string name() const {
    switch (kind) {
      case LossKind::mse: return "mse";
      case LossKind::cross_entropy: return "ce";
      case LossKind::baikal: return "baikal";
      case LossKind::zero: return "zero";
      case LossKind::taylor: {
        std::ostringstream os;
        os.precision(17);
        os << "taylor:";
        for (int i = 0; i < 8; ++i) os << (i ? "," : "") << params[i];
        return os.str();
      }
    }
    return "?";
  }
};

/// Parses a comma-separated list of exactly eight finite numbers.
inline LossParamsd parse_lambda(std::string_view text) {
  LossParamsd::Vector v;
  std::string s(text);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  int count = 0;
  double x;
  while (is >> x) {
    if (count == 8) throw std::invalid_argument("lambda needs exactly 8 values");
    v(count++) = x;
  }
  if (!is.eof() || count != 8) throw std::invalid_argument("lambda needs exactly 8 numbers: '" + std::string(text) + "'");
  return LossParamsd(v);
}

/// "mse" | "ce" | "baikal" | "zero" | "taylor:l0,...,l7"
inline LossSpec parse_loss(std::string_view text) {
  if (text == "mse") return LossSpec::mse();
  if (text == "ce" || text == "cross_entropy") return LossSpec::cross_entropy();
  if (text == "baikal") return LossSpec::baikal();
  if (text == "zero") return LossSpec::zero();
  if (text.starts_with("taylor:")) return LossSpec::taylor(parse_lambda(text.substr(7)));
  throw std::invalid_argument("unknown loss '" + std::string(text) + "'");
}

}  // namespace tglo
