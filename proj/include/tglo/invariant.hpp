#pragma once

// Null-epoch trainability check on Taylor loss coefficients. A loss is
// declared untrainable when both inequalities
//
//   c1 + cy + cyy + (ch + chy)/n + chh/n^2  <  (n-1) * (c1 + ch/n + chh/n^2)
//   cy + cyy + chy/n                        <  (n-2) * (c1 + ch/n + chh/n^2)
//
// hold. Equality counts as trainable.

#include "tglo/loss_core.hpp"

#include <algorithm>
#include <string>

namespace tglo {

template <typename Scalar>
struct InvariantReport {
  Scalar constraint1_lhs = 0, constraint1_rhs = 0;
  Scalar constraint2_lhs = 0, constraint2_rhs = 0;
  bool violated = false;
  /// -min(rhs - lhs) over both constraints; >= 0 means trainable.
  Scalar margin = 0;
};

template <typename Scalar>
InvariantReport<Scalar> check_invariant(const GammaCoeffs<Scalar>& c, int n) {
  require_class_count(n);
  const Scalar nn = Scalar(n);
  const Scalar off_target = c.c1 + c.ch / nn + c.chh / (nn * nn);

  InvariantReport<Scalar> r;
  r.constraint1_lhs = c.c1 + c.cy + c.cyy + (c.ch + c.chy) / nn + c.chh / (nn * nn);
  r.constraint1_rhs = (nn - Scalar(1)) * off_target;
  r.constraint2_lhs = c.cy + c.cyy + c.chy / nn;
  r.constraint2_rhs = (nn - Scalar(2)) * off_target;
  r.violated = r.constraint1_lhs < r.constraint1_rhs && r.constraint2_lhs < r.constraint2_rhs;
  r.margin = -std::min(r.constraint1_rhs - r.constraint1_lhs, r.constraint2_rhs - r.constraint2_lhs);
  return r;
}

struct GateVerdict {
  bool accepted = true;
  std::string reason;

  explicit operator bool() const { return accepted; }
  static GateVerdict accept() { return {}; }
  static GateVerdict reject(std::string why) { return {false, std::move(why)}; }
};

inline constexpr const char* kRejectDegenerate = "degenerate zero gradients";
inline constexpr const char* kRejectInvariant = "invariant violated";

template <typename Scalar>
GateVerdict gate_candidate(const LossParams<Scalar>& p, int n) {
  if (p.is_zero()) return GateVerdict::reject(kRejectDegenerate);
  if (check_invariant(expand_coeffs(p), n).violated) return GateVerdict::reject(kRejectInvariant);
  return GateVerdict::accept();
}

}  // namespace tglo
