#pragma once

// Monte Carlo harnesses: composite hypothesis testing ROC, transient change
// detection ROC, ARL versus worst-case delay, and per-step timing.
//
// Every trial draws its sample path from its own seed derived from
// (master seed, distribution, trial), and all detectors of a scenario read the
// same path. Results land in pre-allocated slots and are reduced in a fixed
// order, so output does not depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ipt/random.hpp"
#include "ipt/simplex.hpp"

namespace ipt {

enum class Scenario { kCht, kTcd, kQcd, kBench };

const char* to_string(Scenario s) noexcept;
Scenario scenario_from_string(const std::string& name);

/// How post-change distributions are drawn from {q >= q_floor}.
enum class F1Sampler {
  /// Dirichlet(1, ..., 1) draws, rejected until q(f1) >= q_floor.
  kDirichlet,
  /// Dirichlet draws pulled along the segment from f0 onto {q = q_floor}.
  kBoundary,
};

const char* to_string(F1Sampler s) noexcept;
F1Sampler f1_sampler_from_string(const std::string& name);

struct ExperimentConfig {
  Scenario scenario = Scenario::kCht;
  std::vector<double> alphabet{-1.0, 0.0, 1.0};
  std::vector<double> f0{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  QKind q_kind = QKind::kMean;
  /// Centering offset of q; thresholds below stay in raw units.
  double offset = 0.0;
  /// Raw post-change floor of q.
  double q_floor = 0.25;

  /// IPT / FMA / GLRT window for cht and qcd; tcd delay budget.
  std::size_t n = 25;
  /// tcd false-alarm horizon.
  std::size_t n_alpha = 200;
  /// tcd rolling window.
  std::size_t window = 20;

  /// IPT first thresholds (raw q; cumulative centered q for qcd).
  std::vector<double> c_s_sweep;
  /// IPT second thresholds in nats (qcd uses each as the plateau c_d).
  std::vector<double> c_d_sweep;
  /// FMA thresholds, raw q units.
  std::vector<double> fma_sweep;
  /// GLRT thresholds, nats.
  std::vector<double> glrt_sweep;
  /// Quickest IPT schedule parameter.
  double rho = 1.0;

  std::size_t trials = 10000;
  /// False-alarm side trial count for tcd (defaults to `trials`).
  std::optional<std::size_t> fa_trials;
  std::size_t post_change_samples = 100;
  F1Sampler f1_sampler = F1Sampler::kDirichlet;
  /// Explicit post-change pmfs; when non-empty they replace random draws.
  std::vector<std::vector<double>> f1_list;

  /// qcd change points (t1) for the worst-case delay proxy.
  std::vector<std::size_t> change_times{1, 10, 20, 40};
  /// qcd stopping-time cap for run lengths and delays.
  std::size_t max_steps = 200000;

  /// bench (m, n) pairs and measured steps per detector.
  std::vector<std::pair<std::size_t, std::size_t>> bench_sizes;
  std::size_t bench_steps = 20000;

  std::uint64_t seed = 1;
  /// 0 uses the hardware concurrency.
  unsigned threads = 0;

  AlphabetPtr alphabet_ptr() const;
  Pmf f0_pmf() const;
  QFunction q() const;
  void validate() const;
};

/// Paper operating points with desk-scale trial counts.
ExperimentConfig cht_defaults();
ExperimentConfig tcd_defaults();
ExperimentConfig qcd_defaults();
ExperimentConfig bench_defaults();
ExperimentConfig defaults_for(Scenario s);

struct CurvePoint {
  std::string detector;
  double c_s = 0.0;
  /// NaN for detectors with a single threshold.
  double c_d = 0.0;
  double x = 0.0;
  double y = 0.0;
  /// 99% half-width of y.
  double ci = 0.0;
  /// 99% half-width of x.
  double x_ci = 0.0;
  /// qcd: fraction of run-length trials stopped by max_steps.
  double censored = 0.0;
};

/// 99% Wilson score interval half-width and center for k successes in n.
struct Interval {
  double center = 0.0;
  double half_width = 0.0;
};
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 2.5758293035489004);

/// Point-mass-free family f(a) ∝ f0(a) exp(theta a^2) with the given variance,
/// clamped below the largest reachable value. Used for discrete Gaussians.
Pmf variance_matched_tilt(const Pmf& f0, double variance);
/// Truncated discrete Gaussian over the alphabet with the given variance.
Pmf discrete_gaussian(const AlphabetPtr& alphabet, double variance);

/// Post-change draws with q(f1) >= q_floor (raw), reproducible from the seed.
std::vector<Pmf> sample_post_change(const ExperimentConfig& config, std::uint64_t seed);

std::vector<CurvePoint> simulate_roc_cht(const ExperimentConfig& config);
std::vector<CurvePoint> simulate_roc_tcd(const ExperimentConfig& config);
std::vector<CurvePoint> simulate_arl_wadd(const ExperimentConfig& config);
std::vector<CurvePoint> simulate(const ExperimentConfig& config);

struct TimingRow {
  std::string detector;
  std::size_t m = 0;
  std::size_t n = 0;
  std::string mode;
  double ns_per_step = 0.0;
};

std::vector<TimingRow> bench_step_time(const ExperimentConfig& config);

/// Points of one detector's curve that no other point beats in both x and y.
std::vector<CurvePoint> lower_envelope(std::vector<CurvePoint> curve);
/// Trapezoidal area over x in [0, 1] with endpoint y carried outward; points
/// sharing an x are averaged first.
double auc(std::vector<CurvePoint> curve);
/// auc() of the lower envelope of one detector's points.
double envelope_auc(const std::vector<CurvePoint>& curve, const std::string& detector);

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve);
void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows);

/// Runs body(i) for i in [0, count) on `threads` workers (0 = hardware).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ipt
