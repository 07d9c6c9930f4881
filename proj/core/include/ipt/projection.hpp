#pragma once

// KL projections onto superlevel sets {q >= c}.
//
// Forward (I-projection): f* = argmin_{q(f) >= c} I(f || f0), the most likely
// way an f0 sample ends up looking like a change. Reverse: argmin over the
// same set of I(f_hat || f1), the inner minimization of the GLRT statistic.
// All solvers reduce to monotone scalar root finding by bisection.

#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <vector>

#include "ipt/simplex.hpp"

namespace ipt {

struct ProjectionResult {
  Pmf f_star;
  /// I(f*||f0) for forward projections, I(f_hat||f1*) for reverse ones.
  double kl_value = 0.0;
  /// Solved Lagrange parameters: {r} for linear tilts, {lambda1, lambda2} for
  /// the variance family, {lambda0, mu} for reverse projections.
  std::vector<double> multipliers;
  /// False when the starting pmf already satisfies the constraint.
  bool active = false;
};

enum class ProjectionDirection { kForward, kReverse };

/// Bisection limits shared by every solver.
inline constexpr int kMaxBisectionIterations = 200;
inline constexpr double kConstraintTolerance = 1e-10;
/// Cap on |multiplier| * (letter span); exp(50) saturates any realistic tilt.
inline constexpr double kMaxNormalizedMultiplier = 50.0;

/// Lambda(r) = ln sum_a f0(a) exp(r a), evaluated with a max-shift.
double log_mgf(const Pmf& f0, double r);
/// Same with arbitrary per-letter weights in place of the letters.
double log_mgf(std::span<const double> f0, std::span<const double> weights, double r);

/// Exponential tilt f*(a) = f0(a) exp(r w(a) - Lambda(r)) with sum_a f* w = target.
/// Returns f0 (r = 0, inactive) when f0 already has weighted mean >= target.
ProjectionResult tilt_linear(const Pmf& f0, std::span<const double> weights, double target);

/// Mean-constrained I-projection; requires a_1 < target_mean < a_m.
ProjectionResult tilt_to_mean(const Pmf& f0, double target_mean);

/// argmin_{q(f) >= c} I(f||f0) with c in q's centered units.
ProjectionResult i_project(const Pmf& f0, const QFunction& q, double c);

/// argmin_{q(f1) >= c} I(f_hat||f1) with c in q's centered units. Linear kinds
/// are solved exactly; the variance kind falls back to the grid oracle for
/// m <= 4 and is Unsupported beyond that.
ProjectionResult reverse_project(const Pmf& f_hat, const QFunction& q, double c);

/// Exhaustive search over the simplex lattice with resolution `step`
/// (m <= 4, step in [1e-3, 0.1]). Test oracle, independent of the solvers.
ProjectionResult grid_oracle_project(const Pmf& reference, const QFunction& q, double c, double step,
                                     ProjectionDirection direction);

/// Memo of f*_n = argmin_{q(f) >= c_s/n} I(f||f0), keyed by window size n.
///
/// Safe to share between detectors on different threads: lookups take a
/// shared lock, misses compute outside the lock and insert if still absent.
class ProjectionCache {
 public:
  ProjectionCache(Pmf f0, QFunction q, double c_s);

  /// nullptr when c_s/n is at or above sup q (no projection exists).
  std::shared_ptr<const ProjectionResult> get(std::size_t n) const;

  const Pmf& f0() const noexcept { return f0_; }
  const QFunction& q() const noexcept { return q_; }
  double c_s() const noexcept { return c_s_; }
  std::size_t size() const;

 private:
  Pmf f0_;
  QFunction q_;
  double c_s_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::size_t, std::shared_ptr<const ProjectionResult>> table_;
};

}  // namespace ipt
