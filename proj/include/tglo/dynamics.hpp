#pragma once

// Softmax entropy dynamics under a decomposed learning rule.
//
// The state studied here has the target scaled logit at 1 - eps and every
// non-target at eps / (n - 1). Treating the raw logits f as free parameters,
// one step of the rule moves them by
//
//   df_T    =  eps (1 - eps) (gamma_T - gamma_notT)
//   df_notT = -df_T / (n - 1)
//
// and the target scaled logit grows iff df_T > df_notT.

#include "tglo/loss_core.hpp"
#include "tglo/loss_spec.hpp"

#include <Eigen/Core>

#include <cmath>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace tglo {

template <typename Scalar>
struct LogitState {
  Scalar epsilon = 0;  ///< total non-target probability mass
  int n = 2;
  Scalar gamma_t = 0;
  Scalar gamma_not_t = 0;

  Scalar target_h() const { return Scalar(1) - epsilon; }
  Scalar nontarget_h() const { return epsilon / Scalar(n - 1); }
};

/// How the non-target raw-logit shift is formed in the strength formula.
enum class NonTargetShift {
  /// Exact softmax Jacobian: df_notT = -df_T / (n - 1).
  jacobian,
  /// Variant whose (n - 2) gamma_notT cross term carries a + sign. Agrees with
  /// `jacobian` for n == 2 or gamma_notT == 0; kept for comparison only.
  flipped_cross_term,
};

template <typename Scalar>
void require_open_epsilon(Scalar eps) {
  if (!(eps > Scalar(0) && eps < Scalar(1)))
    throw std::domain_error("epsilon must lie strictly inside (0, 1)");
}

/// Raw-logit shifts (df_T, df_notT) for one unit step.
template <typename Scalar>
std::pair<Scalar, Scalar> raw_logit_shift(const LogitState<Scalar>& s,
                                          NonTargetShift form = NonTargetShift::jacobian) {
  const Scalar e = s.epsilon;
  const Scalar m = Scalar(s.n - 1);
  const Scalar df_t = e * (Scalar(1) - e) * (s.gamma_t - s.gamma_not_t);
  if (form == NonTargetShift::jacobian) return {df_t, -df_t / m};
  const Scalar df_nt =
      (e * (e - Scalar(1)) * s.gamma_t * m + e * s.gamma_not_t * (e * Scalar(s.n - 3) + m)) / (m * m);
  return {df_t, df_nt};
}

/// Strength of entropy reduction: positive pulls toward zero error, negative
/// pushes away, zero leaves the distribution unchanged.
///
///   eps (eps-1) (e^A - e^B) / ((eps-1) e^A - eps e^B),  A = df_T, B = df_notT
///
/// Both exponentials are shifted by max(A, B) so the value stays finite for
/// large gammas.
template <typename Scalar>
Scalar entropy_reduction_strength(const LogitState<Scalar>& s,
                                  NonTargetShift form = NonTargetShift::jacobian) {
  require_open_epsilon(s.epsilon);
  require_class_count(s.n);
  const auto [a, b] = raw_logit_shift(s, form);
  const Scalar e = s.epsilon;
  Scalar ea, eb, diff;
  if (a >= b) {
    ea = Scalar(1);
    eb = std::exp(b - a);
    diff = -std::expm1(b - a);
  } else {
    ea = std::exp(a - b);
    eb = Scalar(1);
    diff = std::expm1(a - b);
  }
  return e * (e - Scalar(1)) * diff / ((e - Scalar(1)) * ea - e * eb);
}

template <typename Scalar>
struct SoftmaxUpdate {
  Scalar target_before = 0;
  Scalar target = 0;
  Scalar nontarget = 0;

  Scalar target_shift() const { return target - target_before; }
};

/// Direct simulation: build raw logits consistent with the state, move them by
/// eta * J^T gamma with the softmax Jacobian J, and re-normalize.
template <typename Scalar>
SoftmaxUpdate<Scalar> softmax_update_oracle(const LogitState<Scalar>& s, Scalar eta) {
  require_open_epsilon(s.epsilon);
  require_class_count(s.n);
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  auto softmax = [](const Vec& f) -> Vec {
    const Vec z = (f.array() - f.maxCoeff()).exp().matrix();
    return z / z.sum();
  };

  Vec f(s.n);
  f.setConstant(std::log(s.nontarget_h()));
  f(0) = std::log(s.target_h());
  const Vec h = softmax(f);

  Vec gamma(s.n);
  gamma.setConstant(s.gamma_not_t);
  gamma(0) = s.gamma_t;

  const Mat jac = Mat(h.asDiagonal()) - h * h.transpose();
  const Vec moved = softmax(f + eta * (jac.transpose() * gamma));

  SoftmaxUpdate<Scalar> out;
  out.target_before = h(0);
  out.target = moved(0);
  out.nontarget = moved.tail(s.n - 1).mean();
  return out;
}

template <typename Scalar>
struct RepulsionCoeffs {
  Scalar nontarget = 0;
  Scalar target = 0;
};

/// Baikal learning-rule coefficients near zero training error.
template <typename Scalar>
RepulsionCoeffs<Scalar> baikal_repulsion(Scalar eps, int n) {
  require_class_count(n);
  if (eps == Scalar(0)) throw std::domain_error("Baikal coefficients diverge at epsilon = 0");
  require_open_epsilon(eps);
  return {Scalar(n - 1) / eps, (Scalar(2) - eps) / (eps * eps - Scalar(2) * eps + Scalar(1))};
}

// ---------------------------------------------------------------------------
// Per-sample traces over a training run.

/// One sample's scaled logits as seen by the learning rule at some epoch.
struct SampleLogit {
  int epoch = 0;
  int sample_id = 0;
  int n = 2;
  double target_h = 0;
  double mean_nontarget_h = 0;
};

struct TraceRecord {
  int epoch = 0;
  int sample_id = 0;
  double gamma_t = 0;
  double gamma_not_t = 0;
  double epsilon = 0;
  double strength = 0;
  /// epsilon hit 0 or 1; strength is meaningless and excluded from summaries.
  bool boundary = false;
};

std::vector<TraceRecord> attraction_trace(std::span<const SampleLogit> log, const LossSpec& loss,
                                          NonTargetShift form = NonTargetShift::jacobian);

/// epoch,sample_id,gamma_t,gamma_not_t,epsilon,strength with %.9g floats.
/// Boundary records carry "nan" strength.
void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace);

struct EpochSignSummary {
  int epoch = 0;
  int records = 0;
  int boundary = 0;
  int positive = 0;
  int negative = 0;
  int zero = 0;

  double positive_fraction() const {
    const int counted = records - boundary;
    return counted ? double(positive) / counted : 0.0;
  }
  double negative_fraction() const {
    const int counted = records - boundary;
    return counted ? double(negative) / counted : 0.0;
  }
};

std::vector<EpochSignSummary> summarize_trace(std::span<const TraceRecord> trace);

}  // namespace tglo
