#include "ipt/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <utility>

#include "ipt/errors.hpp"

namespace ipt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail_convergence(const char* what, double residual) {
  std::ostringstream os;
  os.precision(6);
  os << what << " did not converge (residual " << residual << ")";
  throw ConvergenceError(os.str());
}

struct SupportRange {
  double lo = kInf;
  double hi = -kInf;
};

SupportRange support_range(std::span<const double> f, std::span<const double> w) {
  SupportRange r;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 0.0) {
      r.lo = std::min(r.lo, w[i]);
      r.hi = std::max(r.hi, w[i]);
    }
  }
  return r;
}

// out = f0 * exp(r * w) normalized; returns sum out * w.
double linear_tilt(std::span<const double> f0, std::span<const double> w, double r, double shift,
                   std::vector<double>& out) {
  double z = 0.0;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    out[i] = f0[i] > 0.0 ? f0[i] * std::exp(r * (w[i] - shift)) : 0.0;
    z += out[i];
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    out[i] /= z;
    mean += out[i] * w[i];
  }
  return mean;
}

// Variance family f(a) ∝ f0(a) exp(lambda2 (a - center)^2).
struct VarianceFamily {
  std::span<const double> f0;
  std::span<const double> letters;
  SupportRange support;

  double tilt(double lambda2, double center, std::vector<double>& out) const {
    // Largest exponent over the support sits at one of its ends.
    const double d = std::max(std::abs(support.lo - center), std::abs(support.hi - center));
    const double shift = lambda2 * d * d;
    double z = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i) {
      const double e = letters[i] - center;
      out[i] = f0[i] > 0.0 ? f0[i] * std::exp(lambda2 * e * e - shift) : 0.0;
      z += out[i];
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i) {
      out[i] /= z;
      mean += out[i] * letters[i];
    }
    return mean;
  }

  // Solves center = mean(f_{lambda2, center}); mean(f_c) - c is decreasing in c.
  double stationary(double lambda2, std::vector<double>& out) const {
    double lo = support.lo, hi = support.hi;
    const double span = hi - lo;
    for (int it = 0; it < kMaxBisectionIterations && hi - lo > 1e-14 * span; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (tilt(lambda2, mid, out) - mid > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double center = 0.5 * (lo + hi);
    const double mean = tilt(lambda2, center, out);
    if (std::abs(mean - center) > kConstraintTolerance * std::max(1.0, span)) {
      fail_convergence("variance projection (mean stationarity)", mean - center);
    }
    double var = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double e = letters[i] - mean;
      var += out[i] * e * e;
    }
    return var;
  }
};

ProjectionResult project_variance(const Pmf& f0, const QFunction& q, double c) {
  const double target = c + q.offset();
  if (f0.variance() >= target) return {f0, 0.0, {0.0, 0.0}, false};

  const auto letters = f0.alphabet().letters();
  VarianceFamily family{f0.probs(), letters, support_range(f0.probs(), letters)};
  const double span = family.support.hi - family.support.lo;
  if (!(target < span * span / 4.0)) {
    throw Infeasible("variance threshold is at or above the largest variance reachable from f0");
  }

  std::vector<double> f(f0.size());
  const double cap = 4.0 * kMaxNormalizedMultiplier / (span * span);
  double lo = 0.0, hi = 1.0 / (span * span);
  while (family.stationary(hi, f) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) fail_convergence("variance projection (multiplier bracket)", target);
  }
  for (int it = 0; it < kMaxBisectionIterations && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (family.stationary(mid, f) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double var = family.stationary(hi, f);
  if (std::abs(var - target) > kConstraintTolerance * std::max(1.0, span * span)) {
    fail_convergence("variance projection", var - target);
  }
  double center = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) center += f[i] * letters[i];

  Pmf f_star = Pmf::from_weights(f0.alphabet_ptr(), std::move(f));
  const double kl = kl_divergence(f_star, f0);
  return {std::move(f_star), kl, {-2.0 * hi * center, hi}, true};
}

// Reverse projection onto {sum_a f1(a) w(a) >= target}. KKT gives
// f1(a) = f_hat(a) / (1 + mu (target - w(a))) on supp(f_hat), plus possibly a
// lump of mass on the top-weight letter when that letter is outside the support.
ProjectionResult reverse_linear(const Pmf& f_hat, std::span<const double> w, double target) {
  const auto p = f_hat.probs();
  const std::size_t m = p.size();
  double current = 0.0;
  for (std::size_t i = 0; i < m; ++i) current += p[i] * w[i];
  if (current >= target) return {f_hat, 0.0, {1.0, 0.0}, false};

  std::size_t top = 0;
  for (std::size_t i = 1; i < m; ++i) {
    if (w[i] >= w[top]) top = i;
  }
  const double w_top = w[top];
  if (!(target < w_top)) {
    throw Infeasible("reverse projection threshold is at or above sup q");
  }
  const SupportRange supp = support_range(p, w);

  auto fill = [&](double mu, std::vector<double>& out) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      out[i] = p[i] > 0.0 ? p[i] / (1.0 + mu * (target - w[i])) : 0.0;
      total += out[i];
    }
    return total;
  };

  std::vector<double> f1(m, 0.0);
  double mu_hi = kInf;
  bool top_outside = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (p[i] > 0.0 && w[i] == w_top) top_outside = false;
  }
  if (top_outside) {
    const double mu_c = 1.0 / (w_top - target);
    const double lump = 1.0 - fill(mu_c, f1);
    if (lump >= 0.0) {
      f1[top] = lump;
      Pmf f1_star = Pmf::from_weights(f_hat.alphabet_ptr(), std::move(f1));
      const double kl = kl_divergence(f_hat, f1_star);
      return {std::move(f1_star), kl, {mu_c * w_top, mu_c}, true};
    }
    mu_hi = mu_c;
  } else {
    mu_hi = 1.0 / (supp.hi - target);
  }

  // h(mu) = sum f1 - 1 is convex with h(0) = 0, h'(0) < 0 and h(mu_hi) > 0.
  double lo = 0.0, hi = mu_hi;
  for (int it = 0; it < kMaxBisectionIterations && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fill(mid, f1) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double mu = hi;
  const double total = fill(mu, f1);
  if (std::abs(total - 1.0) > kConstraintTolerance) {
    fail_convergence("reverse projection", total - 1.0);
  }
  Pmf f1_star = Pmf::from_weights(f_hat.alphabet_ptr(), std::move(f1));
  const double kl = kl_divergence(f_hat, f1_star);
  return {std::move(f1_star), kl, {1.0 + mu * target, mu}, true};
}

void for_each_lattice_point(std::size_t m, int total, std::vector<int>& counts, std::size_t pos, int remaining,
                            auto&& visit) {
  if (pos + 1 == m) {
    counts[pos] = remaining;
    visit(counts);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    counts[pos] = k;
    for_each_lattice_point(m, total, counts, pos + 1, remaining - k, visit);
  }
}

}  // namespace

double log_mgf(std::span<const double> f0, std::span<const double> weights, double r) {
  if (f0.size() != weights.size()) throw InvalidArgument("weights do not match pmf");
  if (!std::isfinite(r)) throw InvalidArgument("log_mgf needs a finite argument");
  // Shift by the exponent's maximum so exp never overflows.
  double shift = -kInf;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    if (f0[i] > 0.0) shift = std::max(shift, r * weights[i]);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    if (f0[i] > 0.0) s += f0[i] * std::exp(r * weights[i] - shift);
  }
  return shift + std::log(s);
}

double log_mgf(const Pmf& f0, double r) { return log_mgf(f0.probs(), f0.alphabet().letters(), r); }

ProjectionResult tilt_linear(const Pmf& f0, std::span<const double> weights, double target) {
  const auto p = f0.probs();
  if (weights.size() != p.size()) throw InvalidArgument("weights do not match pmf");
  double current = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) current += p[i] * weights[i];
  if (current >= target) return {f0, 0.0, {0.0}, false};

  const SupportRange supp = support_range(p, weights);
  if (!(target < supp.hi)) {
    throw Infeasible("tilt target is at or above the largest weight in the support of f0");
  }
  const double span = supp.hi - supp.lo;
  std::vector<double> f(p.size());
  double lo = 0.0, hi = 1.0 / span;
  while (linear_tilt(p, weights, hi, supp.hi, f) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi * span > kMaxNormalizedMultiplier) fail_convergence("exponential tilt (multiplier bracket)", target);
  }
  for (int it = 0; it < kMaxBisectionIterations && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (linear_tilt(p, weights, mid, supp.hi, f) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r = hi;
  const double mean = linear_tilt(p, weights, r, supp.hi, f);
  if (std::abs(mean - target) > kConstraintTolerance * std::max(1.0, span)) {
    fail_convergence("exponential tilt", mean - target);
  }
  const double kl = std::max(0.0, r * mean - log_mgf(p, weights, r));
  return {Pmf::from_weights(f0.alphabet_ptr(), std::move(f)), kl, {r}, true};
}

ProjectionResult tilt_to_mean(const Pmf& f0, double target_mean) {
  const Alphabet& a = f0.alphabet();
  if (!(target_mean > a.front() && target_mean < a.back())) {
    throw Infeasible("target mean must lie strictly inside (a_1, a_m)");
  }
  return tilt_linear(f0, a.letters(), target_mean);
}

ProjectionResult i_project(const Pmf& f0, const QFunction& q, double c) {
  if (!same_alphabet(f0.alphabet_ptr(), q.alphabet_ptr())) {
    throw InvalidArgument("f0 and q use different alphabets");
  }
  if (!std::isfinite(c)) throw InvalidArgument("projection threshold must be finite");
  if (q(f0) >= c) return {f0, 0.0, q.kind() == QKind::kVariance ? std::vector<double>{0.0, 0.0} : std::vector<double>{0.0}, false};
  if (!(c < q.supremum())) throw Infeasible("projection threshold is at or above sup q");

  switch (q.kind()) {
    case QKind::kMean:
      return tilt_to_mean(f0, c + q.offset());
    case QKind::kLogLikelihoodRatio:
      return tilt_linear(f0, q.weights(), c + q.offset());
    case QKind::kVariance:
      return project_variance(f0, q, c);
  }
  throw Unsupported("unknown q kind");
}

ProjectionResult reverse_project(const Pmf& f_hat, const QFunction& q, double c) {
  if (!same_alphabet(f_hat.alphabet_ptr(), q.alphabet_ptr())) {
    throw InvalidArgument("f_hat and q use different alphabets");
  }
  if (!std::isfinite(c)) throw InvalidArgument("projection threshold must be finite");
  if (q(f_hat) >= c) return {f_hat, 0.0, {1.0, 0.0}, false};
  if (!(c < q.supremum())) throw Infeasible("projection threshold is at or above sup q");
  if (q.is_linear()) return reverse_linear(f_hat, q.weights(), c + q.offset());
  if (f_hat.size() <= 4) return grid_oracle_project(f_hat, q, c, 0.005, ProjectionDirection::kReverse);
  throw Unsupported("reverse projection for the variance kind is only available for m <= 4");
}

ProjectionResult grid_oracle_project(const Pmf& reference, const QFunction& q, double c, double step,
                                     ProjectionDirection direction) {
  const std::size_t m = reference.size();
  if (m > 4) throw InvalidArgument("grid oracle supports alphabets of at most 4 letters");
  if (!(step >= 1e-3 && step <= 0.1)) throw InvalidArgument("grid step must lie in [1e-3, 0.1]");
  if (!same_alphabet(reference.alphabet_ptr(), q.alphabet_ptr())) {
    throw InvalidArgument("reference pmf and q use different alphabets");
  }
  const int total = static_cast<int>(std::lround(1.0 / step));
  const auto ref = reference.probs();

  std::vector<int> counts(m, 0);
  std::vector<double> f(m), best_f;
  double best = kInf;
  for_each_lattice_point(m, total, counts, 0, total, [&](const std::vector<int>& k) {
    for (std::size_t i = 0; i < m; ++i) f[i] = static_cast<double>(k[i]) / total;
    if (q(f) < c) return;
    const double d = direction == ProjectionDirection::kForward ? kl_divergence(f, ref) : kl_divergence(ref, f);
    if (d < best) {
      best = d;
      best_f = f;
    }
  });
  if (best_f.empty() || !std::isfinite(best)) {
    throw Infeasible("no lattice point with finite divergence satisfies the constraint");
  }
  // Zoom: finer local lattices around the incumbent, last coordinate implied.
  constexpr int kHalf = 12;
  double h = step;
  for (int round = 0, repeats = 0; round < 5;) {
    if (repeats == 0) h /= 8.0;
    const std::vector<double> center = best_f;
    std::vector<int> j(m - 1, -kHalf);
    while (true) {
      double rest = 1.0;
      bool ok = true;
      for (std::size_t i = 0; i + 1 < m; ++i) {
        f[i] = center[i] + j[i] * h;
        if (f[i] < 0.0) ok = false;
        rest -= f[i];
      }
      f[m - 1] = rest;
      if (ok && rest >= 0.0 && q(f) >= c) {
        const double d = direction == ProjectionDirection::kForward ? kl_divergence(f, ref) : kl_divergence(ref, f);
        if (d < best) {
          best = d;
          best_f = f;
        }
      }
      std::size_t i = 0;
      while (i + 1 < m && ++j[i] > kHalf) j[i++] = -kHalf;
      if (i + 1 == m) break;
    }
    // Stay at this scale while the incumbent keeps moving.
    if (best_f != center && ++repeats < 400) continue;
    repeats = 0;
    ++round;
  }
  const bool active = q(reference) < c;
  return {Pmf::from_weights(reference.alphabet_ptr(), std::move(best_f)), best, {}, active};
}

// ---------------------------------------------------------------------------

ProjectionCache::ProjectionCache(Pmf f0, QFunction q, double c_s)
    : f0_(std::move(f0)), q_(std::move(q)), c_s_(c_s) {
  if (!same_alphabet(f0_.alphabet_ptr(), q_.alphabet_ptr())) {
    throw InvalidArgument("f0 and q use different alphabets");
  }
}

std::shared_ptr<const ProjectionResult> ProjectionCache::get(std::size_t n) const {
  if (n == 0) return nullptr;
  {
    std::shared_lock lock(mutex_);
    if (auto it = table_.find(n); it != table_.end()) return it->second;
  }
  std::shared_ptr<const ProjectionResult> value;
  const double c = c_s_ / static_cast<double>(n);
  if (c < q_.supremum()) {
    try {
      value = std::make_shared<const ProjectionResult>(i_project(f0_, q_, c));
    } catch (const Infeasible&) {
      value = nullptr;
    }
  }
  std::unique_lock lock(mutex_);
  return table_.try_emplace(n, std::move(value)).first->second;
}

std::size_t ProjectionCache::size() const {
  std::shared_lock lock(mutex_);
  return table_.size();
}

}  // namespace ipt
