#pragma once

// Closed-form performance bounds for IPT. Statistic values (c_s, q0, q_floor)
// are in centered q units; the fixed-window bounds only depend on
// differences, the quickest-change ones need the centered convention
// q0 < 0 < q_floor.

#include <cstddef>

#include "ipt/simplex.hpp"

namespace ipt {

struct BoundInputs {
  std::size_t n = 25;
  std::size_t m = 3;
  double c_s = 0.0;
  double c_d = 0.0;
  double q0 = -0.1;
  double q_floor = 0.25;
  double lipschitz = 1.0;
  double rho = 1.0;
  std::size_t n_alpha = 200;
  double gamma = 0.0;
};

/// A bound value as computed and as a probability (or count) clamp.
struct BoundValue {
  double raw = 0.0;
  double clamped = 0.0;
};

/// False-alarm probability of one fixed window:
/// (n+1)^m exp(-n (c_d + ((c_s - q0)^+)^2 / (2 L^2))).
BoundValue fa_bound(const BoundInputs& b);

/// Worst-case misdetection of one fixed window. Throws PreconditionViolation
/// unless (c_s - q0)^+ + sqrt(2 L^2 c_d) < q_floor - q0.
BoundValue md_bound(const BoundInputs& b);

struct TcdBounds {
  BoundValue fa_window;
  BoundValue md;
  double nu = 0.0;
  double eta = 0.0;
  /// ceil(2 n_alpha / (n + 1)) decision epochs inside the false-alarm window.
  std::size_t epochs = 0;
  /// Set when nu or eta is negative, i.e. a bound is >= 1.
  bool vacuous = false;
};

/// Transient-change bounds for a fixed window of (n+1)/2 samples checked at
/// non-overlapping epochs. Same precondition as md_bound.
TcdBounds tcd_bounds(const BoundInputs& b);

/// v* > 0 with sum_a f0(a) exp(v* (a - offset)) = 1 for a Mean-kind q.
double wald_root(const Pmf& f0, const QFunction& q);

struct ArlBound {
  double value = 0.0;
  /// exp((v* + 2|q0|/L^2) c_s), the c_s -> infinity limit.
  double asymptote = 0.0;
  /// |q0| < (1 + rho) q_floor, outside the regime the derivation assumes.
  bool warning = false;
};

/// Lower bound on the average run length of quickest IPT with the plateau
/// schedule. Throws PreconditionViolation when c_d is below
/// 2|q0| q_floor / ((1 + rho) L^2) or the geometric series diverges.
ArlBound arl_bound(const BoundInputs& b, double v_star);
/// Same, restricted to q kinds the bound is derived for (Mean only).
ArlBound arl_bound(const BoundInputs& b, double v_star, const QFunction& q);

/// 2 c_s / q_floor.
double wadd_bound(double c_s, double q_floor);

/// ln(gamma) / (q_floor (v*/2 + |q0| / L^2)).
double lorden_wadd(double gamma, double v_star, double q_floor, double q0, double lipschitz);

}  // namespace ipt
