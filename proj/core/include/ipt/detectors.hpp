#pragma once

// Streaming detectors: fixed-window IPT, quickest-change IPT with restarts,
// and the FMA and GLRT window baselines. Every detector consumes alphabet
// indices; the letter-valued overloads convert and reject unknown letters.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ipt/projection.hpp"
#include "ipt/simplex.hpp"
#include "ipt/window.hpp"

namespace ipt {

enum class Decision { kNoAlarm, kChange };
enum class StepDecision { kContinue, kRestart, kAlarm };

const char* to_string(Decision d) noexcept;
const char* to_string(StepDecision d) noexcept;

/// One evaluated step. `s` is the detector's first statistic in the units it
/// compares against c_s; `d` is present only when the RLLF was computed.
struct TraceRow {
  std::size_t k = 0;
  double s = 0.0;
  std::optional<double> d;
  std::size_t n_k = 0;
};

struct AlarmReport {
  std::optional<std::size_t> alarm_time;
  Decision decision = Decision::kNoAlarm;
  /// Restart times (quickest) or window ends judged to be outliers (fixed).
  std::vector<std::size_t> restarts;
  std::vector<TraceRow> trace;
};

// ---------------------------------------------------------------------------
// Fixed-window IPT

struct FixedIptConfig {
  Pmf f0;
  QFunction q;
  std::size_t n = 25;
  /// 1 for a rolling window, corollary_stride(n) for non-overlapping epochs.
  std::size_t stride = 1;
  /// Raw q units.
  double c_s = 0.0;
  /// Nats.
  double c_d = 0.0;
  bool record_trace = false;
};

/// ceil((n + 1) / 2).
std::size_t corollary_stride(std::size_t n) noexcept;

class FixedIpt {
 public:
  explicit FixedIpt(FixedIptConfig config);

  const FixedIptConfig& config() const noexcept { return config_; }
  /// The most likely outlier f* for the window.
  const ProjectionResult& projection() const noexcept { return projection_; }

  /// Window membership in the alarm region {q >= c_s} and {I(.||f*) >= c_d}.
  bool alarms(std::span<const std::uint32_t> counts) const;

  AlarmReport run(std::span<const std::uint32_t> stream) const;

 private:
  FixedIptConfig config_;
  ProjectionResult projection_;
};

AlarmReport fixed_ipt_run(const FixedIptConfig& config, std::span<const double> stream);

// ---------------------------------------------------------------------------
// Quickest-change IPT

struct QuickestIptConfig {
  Pmf f0;
  QFunction q;
  /// Threshold on S_k, a sum of centered q values over the effective window.
  double c_s = 10.0;
  /// Plateau RLLF threshold in nats.
  double c_d = 0.0;
  double rho = 1.0;
  /// Post-change floor of q in raw units.
  double q_floor = 0.0;
  /// Cap on the effective window for q kinds without the O(1) recursion.
  std::optional<std::size_t> max_lookback;
  bool record_trace = false;
};

/// 0 while n <= (1 + rho) c_s / q_floor (centered), c_d afterwards.
double cd_schedule(std::size_t n, const QuickestIptConfig& config);

struct DetectorState {
  std::size_t k = 0;
  std::size_t tau = 1;
  double s_stat = 0.0;
  std::optional<double> d_stat;
  std::size_t i_k = 1;
  std::size_t n_k = 0;
  std::vector<std::uint32_t> window_counts;
};

class QuickestIpt {
 public:
  /// A shared cache lets detectors with the same (f0, q, c_s) reuse f*_n.
  explicit QuickestIpt(QuickestIptConfig config, std::shared_ptr<const ProjectionCache> cache = nullptr);

  StepDecision step(std::uint32_t letter);
  /// Back to the freshly constructed state (k = 0).
  void reset();

  DetectorState state() const;
  std::size_t k() const noexcept { return k_; }
  std::size_t tau() const noexcept { return tau_; }
  double s() const noexcept { return s_; }
  std::optional<double> d() const noexcept { return d_; }
  std::size_t n_k() const noexcept { return window_.size(); }
  /// Statistics of the most recent step, taken before any restart it caused.
  const TraceRow& last_step() const noexcept { return last_; }

  const QuickestIptConfig& config() const noexcept { return config_; }
  const std::shared_ptr<const ProjectionCache>& cache() const noexcept { return cache_; }

 private:
  void restart();
  void update_general(std::uint32_t letter);
  double rllf() const;

  QuickestIptConfig config_;
  std::shared_ptr<const ProjectionCache> cache_;
  double offset_;
  double q_floor_centered_;
  std::size_t k_ = 0;
  std::size_t tau_ = 1;
  double s_ = 0.0;
  std::optional<double> d_;
  TraceRow last_;
  // Letters X_{i_k}..X_k of the effective window (linear kinds), or all
  // letters since tau_ within the lookback cap (general q).
  std::vector<std::uint32_t> window_;
  std::vector<std::uint32_t> history_;
  std::vector<std::uint32_t> counts_;
};

AlarmReport quickest_ipt_run(QuickestIpt& detector, std::span<const std::uint32_t> stream);
AlarmReport quickest_ipt_run(const QuickestIptConfig& config, std::span<const double> stream);

// ---------------------------------------------------------------------------
// Baselines

/// Alarm at the first k >= window with q(f_hat) >= threshold (raw units).
AlarmReport fma_run(std::size_t window, double threshold, const QFunction& q,
                    std::span<const std::uint32_t> stream, bool record_trace = false);
AlarmReport fma_run(std::size_t window, double threshold, const QFunction& q, std::span<const double> stream,
                    bool record_trace = false);

/// n [I(f_hat||f0) - min_{q(f1) >= q_floor} I(f_hat||f1)], q_floor in raw units.
double glrt_statistic(std::span<const std::uint32_t> counts, const Pmf& f0, const QFunction& q, double q_floor);

/// Memo of glrt_statistic keyed by the count vector, for repeated windows.
class GlrtStatCache {
 public:
  GlrtStatCache(Pmf f0, QFunction q, double q_floor);
  double operator()(std::span<const std::uint32_t> counts);

 private:
  Pmf f0_;
  QFunction q_;
  double q_floor_;
  std::map<std::vector<std::uint32_t>, double, std::less<>> table_;
};

/// Alarm at the first k >= window with the GLRT statistic >= threshold (nats).
AlarmReport glrt_run(std::size_t window, double threshold, const QFunction& q, double q_floor, const Pmf& f0,
                     std::span<const std::uint32_t> stream, bool record_trace = false);
AlarmReport glrt_run(std::size_t window, double threshold, const QFunction& q, double q_floor, const Pmf& f0,
                     std::span<const double> stream, bool record_trace = false);

}  // namespace ipt
