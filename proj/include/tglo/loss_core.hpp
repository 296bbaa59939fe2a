#pragma once

// Learning-rule coefficients (gamma) for the four analyzed loss families and
// the coefficient algebra of the third-order Taylor parameterization.
//
// Every loss here trains by the rule
//
//   theta_j <- theta_j + eta * (1/n) * sum_k gamma_k * d h_k / d theta_j
//
// where h_k is the k-th softmax output. A loss is fully characterized, as far
// as training is concerned, by its gamma_k(h_k, y_k).

#include <Eigen/Core>

#include <array>
#include <initializer_list>
#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace tglo {

/// Default lower bound applied to a scaled logit before dividing by it.
inline constexpr double kDefaultLogitFloor = 1e-12;

/// The eight parameters lambda_0 .. lambda_7 of a third-order Taylor loss.
template <typename Scalar>
struct LossParams {
  static_assert(std::is_floating_point_v<Scalar>, "non floating-point scalar type");
  using Vector = Eigen::Matrix<Scalar, 8, 1>;

  Vector lambda = Vector::Zero();

  LossParams() = default;
  explicit LossParams(const Vector& values) : lambda(values) { validate(); }
  LossParams(std::initializer_list<Scalar> values) {
    if (values.size() != 8) throw std::invalid_argument("LossParams needs exactly 8 values");
    int i = 0;
    for (Scalar v : values) lambda(i++) = v;
    validate();
  }

  Scalar operator[](int i) const { return lambda(i); }
  Scalar& operator[](int i) { return lambda(i); }

  bool is_zero() const { return (lambda.array() == Scalar(0)).all(); }

  void validate() const {
    if (!lambda.allFinite()) throw std::invalid_argument("LossParams entries must be finite");
  }

  friend bool operator==(const LossParams& a, const LossParams& b) { return a.lambda == b.lambda; }
};

/// gamma = c1 + ch*h + chh*h^2 + chy*h*y + cy*y + cyy*y^2
template <typename Scalar>
struct GammaCoeffs {
  Scalar c1 = 0, ch = 0, chh = 0, chy = 0, cy = 0, cyy = 0;

  Scalar operator()(Scalar h, Scalar y) const {
    return c1 + ch * h + chh * h * h + chy * h * y + cy * y + cyy * y * y;
  }

  bool all_finite() const {
    return std::isfinite(c1) && std::isfinite(ch) && std::isfinite(chh) && std::isfinite(chy) &&
           std::isfinite(cy) && std::isfinite(cyy);
  }

  friend bool operator==(const GammaCoeffs&, const GammaCoeffs&) = default;
};

/// Zero-training-error reduction: gamma = a + b*y + c*y^2 once h == y.
template <typename Scalar>
struct ZeroErrorCoeffs {
  Scalar a = 0, b = 0, c = 0;

  Scalar operator()(Scalar y) const { return a + b * y + c * y * y; }
};

/// Gamma for a target logit and a non-target logit.
template <typename Scalar>
struct GammaPair {
  Scalar target = 0;
  Scalar nontarget = 0;
};

using LossParamsd = LossParams<double>;
using GammaCoeffsd = GammaCoeffs<double>;
using ZeroErrorCoeffsd = ZeroErrorCoeffs<double>;

// ---------------------------------------------------------------------------
// Per-family gammas.

template <typename Scalar>
Scalar gamma_mse(Scalar h, Scalar y) {
  return Scalar(2) * y - Scalar(2) * h;
}

/// y / h. Throws std::domain_error for h == 0 with y != 0; callers clamp h to
/// a floor first.
template <typename Scalar>
Scalar gamma_ce(Scalar h, Scalar y) {
  if (y == Scalar(0)) return Scalar(0);
  if (h == Scalar(0)) throw std::domain_error("cross-entropy gamma indeterminate at h = 0");
  return y / h;
}

/// 1/h + y/h^2. Throws std::domain_error for h == 0 (unbounded gradient).
template <typename Scalar>
Scalar gamma_baikal(Scalar h, Scalar y) {
  if (h == Scalar(0)) throw std::domain_error("Baikal gamma unbounded at h = 0");
  return Scalar(1) / h + y / (h * h);
}

/// Term-by-term derivative of the third-order Taylor loss with respect to h.
template <typename Scalar>
Scalar gamma_taylor(const LossParams<Scalar>& p, Scalar h, Scalar y) {
  const Scalar hs = h - p[1];
  const Scalar ys = y - p[0];
  return p[2] + Scalar(2) * p[3] * hs + Scalar(3) * p[4] * hs * hs + p[5] * ys +
         Scalar(2) * p[6] * ys * hs + p[7] * ys * ys;
}

// ---------------------------------------------------------------------------
// Coefficient algebra.

template <typename Scalar>
GammaCoeffs<Scalar> expand_coeffs(const LossParams<Scalar>& p) {
  const Scalar l0 = p[0], l1 = p[1], l2 = p[2], l3 = p[3], l4 = p[4], l5 = p[5], l6 = p[6], l7 = p[7];
  GammaCoeffs<Scalar> c;
  c.c1 = l2 - Scalar(2) * l1 * l3 + Scalar(2) * l1 * l6 * l0 - l5 * l0 + l7 * l0 * l0 +
         Scalar(3) * l4 * l1 * l1;
  c.ch = Scalar(2) * l3 - Scalar(2) * l6 * l0 - Scalar(6) * l1 * l4;
  c.chh = Scalar(3) * l4;
  c.chy = Scalar(2) * l6;
  c.cy = l5 - Scalar(2) * l1 * l6 - Scalar(2) * l7 * l0;
  c.cyy = l7;
  return c;
}

template <typename Scalar>
ZeroErrorCoeffs<Scalar> zero_error_coeffs(const LossParams<Scalar>& p) {
  const Scalar l0 = p[0], l1 = p[1], l2 = p[2], l3 = p[3], l4 = p[4], l5 = p[5], l6 = p[6], l7 = p[7];
  ZeroErrorCoeffs<Scalar> z;
  z.a = l2 - Scalar(2) * l1 * l3 - l5 * l0 + Scalar(2) * l1 * l6 * l0 + l7 * l0 * l0 +
        Scalar(3) * l4 * l1 * l1;
  z.b = Scalar(2) * l3 - Scalar(2) * l6 * l0 - Scalar(2) * l1 * l6 + l5 - Scalar(2) * l7 * l0 -
        Scalar(6) * l4 * l1;
  z.c = Scalar(2) * l6 + l7 + Scalar(3) * l4;
  return z;
}

/// The same reduction read off expanded coefficients (h = y substituted).
template <typename Scalar>
ZeroErrorCoeffs<Scalar> zero_error_from_coeffs(const GammaCoeffs<Scalar>& c) {
  return {c.c1, c.ch + c.cy, c.chh + c.chy + c.cyy};
}

inline void require_class_count(int n) {
  if (n < 2) throw std::invalid_argument("class count must be at least 2, got " + std::to_string(n));
}

/// Gamma at the null epoch, where every scaled logit is expected to be 1/n.
template <typename Scalar>
GammaPair<Scalar> null_epoch_gamma(const GammaCoeffs<Scalar>& c, int n) {
  require_class_count(n);
  const Scalar h = Scalar(1) / Scalar(n);
  return {c(h, Scalar(1)), c(h, Scalar(0))};
}

/// Smoothed target values for smoothing factor alpha over n classes.
template <typename Scalar>
GammaPair<Scalar> smoothed_targets(Scalar alpha, int n) {
  require_class_count(n);
  if (!(alpha > Scalar(0) && alpha < Scalar(1)))
    throw std::invalid_argument("label smoothing factor must lie in (0, 1)");
  return {Scalar(1) - alpha * Scalar(n - 1) / Scalar(n), alpha / Scalar(n)};
}

/// Coefficients that, under hard {0,1} targets, reproduce `c` evaluated on
/// label-smoothed targets.
template <typename Scalar>
GammaCoeffs<Scalar> smooth_coeffs(const GammaCoeffs<Scalar>& c, Scalar alpha, int n) {
  const auto t = smoothed_targets(alpha, n);
  const Scalar on = t.target;
  const Scalar off = t.nontarget;
  GammaCoeffs<Scalar> s;
  s.c1 = c.c1 + c.cy * off + c.cyy * off * off;
  s.ch = c.ch + c.chy * off;
  s.chh = c.chh;
  s.chy = c.chy * on - c.chy * off;
  s.cy = c.cy * on - c.cy * off;
  s.cyy = c.cyy * on * on - c.cyy * off * off;
  return s;
}

// ---------------------------------------------------------------------------
// Reference constants.

/// Taylor parameters that reproduce mean squared error exactly.
template <typename Scalar = double>
LossParams<Scalar> mse_taylor_params() {
  return LossParams<Scalar>{0, 0, 0, -1, 0, 2, 0, 0};
}

/// Published zero-error reduction of the loss evolved for AllCNN-C on CIFAR-10.
/// The generating lambda was never published.
inline constexpr ZeroErrorCoeffsd kAllCnnZeroError{-373.917, -129.928, -11.3145};

/// Published per-label polynomials in h for the same loss, folded into
/// GammaCoeffs. Only cy + cyy is determined by them (labels are 0/1), so the
/// y-offset is stored entirely in cy. These do not agree with
/// kAllCnnZeroError; both are kept as published.
inline constexpr GammaCoeffsd kAllCnnNullEpochCoeffs{
    /*c1*/ -373.917, /*ch*/ -130.264, /*chh*/ -11.2188,
    /*chy*/ -131.47 - (-130.264), /*cy*/ -372.470735 - (-373.917), /*cyy*/ 0.0};

/// Published values of the above at h = 1/10.
inline constexpr GammaPair<double> kAllCnnNullEpochGammaN10{-385.729923, -386.9546188};

}  // namespace tglo
