#include "ipt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ipt/errors.hpp"
#include "ipt/projection.hpp"

namespace ipt {

namespace {

BoundValue probability(double raw) { return {raw, std::min(1.0, raw)}; }

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

void check_common(const BoundInputs& b) {
  if (b.n == 0 || b.m < 2) throw InvalidArgument("bounds need n >= 1 and m >= 2");
  if (!(b.lipschitz > 0.0)) throw InvalidArgument("Lipschitz constant must be positive");
  if (!(b.c_d >= 0.0)) throw InvalidArgument("c_d must be non-negative");
}

void check_md_condition(const BoundInputs& b) {
  const double lhs = positive_part(b.c_s - b.q0) + std::sqrt(2.0 * b.lipschitz * b.lipschitz * b.c_d);
  if (!(lhs < b.q_floor - b.q0)) {
    throw PreconditionViolation("misdetection bound needs (c_s - q0)^+ + sqrt(2 L^2 c_d) < q_floor - q0");
  }
}

double log_window_count(const BoundInputs& b) { return static_cast<double>(b.m) * std::log(b.n + 1.0); }

}  // namespace

BoundValue fa_bound(const BoundInputs& b) {
  check_common(b);
  const double gap = positive_part(b.c_s - b.q0);
  const double rate = b.c_d + gap * gap / (2.0 * b.lipschitz * b.lipschitz);
  return probability(std::exp(log_window_count(b) - static_cast<double>(b.n) * rate));
}

BoundValue md_bound(const BoundInputs& b) {
  check_common(b);
  check_md_condition(b);
  const double margin = (b.q_floor - b.q0 - positive_part(b.c_s - b.q0)) / (std::sqrt(2.0) * b.lipschitz);
  const double root = margin - std::sqrt(b.c_d);
  return probability(std::exp(log_window_count(b) - static_cast<double>(b.n) * root * root));
}

TcdBounds tcd_bounds(const BoundInputs& b) {
  check_common(b);
  check_md_condition(b);
  const double n = static_cast<double>(b.n);
  const double m = static_cast<double>(b.m);
  const double l = b.lipschitz;
  const double gap = positive_part(b.c_s - b.q0);
  const double penalty = m * std::log((n + 3.0) / 2.0) / (n + 1.0);

  TcdBounds out;
  out.nu = b.c_d / 2.0 + gap * gap / (4.0 * l * l) - penalty;
  const double root = (b.q_floor - b.q0 - gap) / (2.0 * l) - std::sqrt(b.c_d / 2.0);
  out.eta = root * root - penalty;
  out.epochs = static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(b.n_alpha) / (n + 1.0)));
  out.vacuous = out.nu < 0.0 || out.eta < 0.0;

  const double single = std::exp(-out.nu * n);
  if (out.nu < 0.0) {
    out.fa_window = probability(single);
  } else {
    // 1 - (1 - x)^K without cancellation for small x.
    out.fa_window = probability(-std::expm1(static_cast<double>(out.epochs) * std::log1p(-single)));
  }
  out.md = probability(std::exp(-out.eta * n));
  return out;
}

double wald_root(const Pmf& f0, const QFunction& q) {
  if (q.kind() != QKind::kMean) throw Unsupported("the Wald root is defined for the mean kind only");
  const auto letters = f0.alphabet().letters();
  std::vector<double> centered(letters.size());
  double top = -std::numeric_limits<double>::infinity(), bottom = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < letters.size(); ++a) {
    centered[a] = letters[a] - q.offset();
    if (f0[a] > 0.0) {
      top = std::max(top, centered[a]);
      bottom = std::min(bottom, centered[a]);
    }
  }
  const double q0 = q(f0);
  if (!(q0 < 0.0)) throw InvalidArgument("no positive Wald root: q(f0) must be negative");
  if (!(top > 0.0)) throw InvalidArgument("no positive Wald root: every centered letter is non-positive");

  // ln psi is convex, zero at 0 with negative slope, and grows without bound.
  auto log_psi = [&](double v) { return log_mgf(f0.probs(), centered, v); };
  double lo = 0.0, hi = 1.0 / (top - bottom);
  while (log_psi(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < kMaxBisectionIterations && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_psi(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ArlBound arl_bound(const BoundInputs& b, double v_star) {
  if (!(b.q0 < 0.0 && b.q_floor > 0.0)) throw InvalidArgument("ARL bound needs q0 < 0 < q_floor");
  if (!(b.c_s > 0.0 && b.rho > 0.0 && b.lipschitz > 0.0)) {
    throw InvalidArgument("ARL bound needs positive c_s, rho and L");
  }
  if (!(v_star > 0.0)) throw InvalidArgument("Wald root must be positive");
  const double l2 = b.lipschitz * b.lipschitz;
  const double abs_q0 = std::abs(b.q0);
  const double m = static_cast<double>(b.m);
  if (!(b.c_d >= 2.0 * abs_q0 * b.q_floor / ((1.0 + b.rho) * l2))) {
    throw PreconditionViolation("ARL bound needs c_d >= 2|q0| q_floor / ((1 + rho) L^2)");
  }
  const double span = (1.0 + b.rho) * b.c_s / b.q_floor;
  const double log_ratio = m * b.q_floor / ((1.0 + b.rho) * b.c_s) * std::log(span + 1.0) - b.c_d;
  if (!(log_ratio < 0.0)) throw PreconditionViolation("ARL bound needs a convergent geometric series");

  const double log_first = m * std::log(2.0) - 2.0 * abs_q0 * b.c_s / l2;
  const double log_second = m * std::log(span + 1.0) - span * b.c_d - std::log(-std::expm1(log_ratio));
  const double hi = std::max(log_first, log_second);
  const double log_denominator = hi + std::log(std::exp(log_first - hi) + std::exp(log_second - hi));

  ArlBound out;
  out.value = std::exp(v_star * b.c_s - log_denominator);
  out.asymptote = std::exp((v_star + 2.0 * abs_q0 / l2) * b.c_s);
  out.warning = abs_q0 < (1.0 + b.rho) * b.q_floor;
  return out;
}

ArlBound arl_bound(const BoundInputs& b, double v_star, const QFunction& q) {
  if (q.kind() != QKind::kMean) throw Unsupported("the ARL bound is derived for the mean kind only");
  return arl_bound(b, v_star);
}

double wadd_bound(double c_s, double q_floor) {
  if (!(q_floor > 0.0) || c_s < 0.0) throw InvalidArgument("WADD bound needs c_s >= 0 and q_floor > 0");
  return 2.0 * c_s / q_floor;
}

double lorden_wadd(double gamma, double v_star, double q_floor, double q0, double lipschitz) {
  if (!(gamma > 1.0)) throw InvalidArgument("gamma must exceed 1");
  return std::log(gamma) / (q_floor * (v_star / 2.0 + std::abs(q0) / (lipschitz * lipschitz)));
}

}  // namespace ipt
