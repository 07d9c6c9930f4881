#include "ipt/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ipt/errors.hpp"

namespace ipt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kl_from_counts(std::span<const std::uint32_t> counts, std::size_t n, std::span<const double> g) {
  const double nd = static_cast<double>(n);
  double s = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) continue;
    if (!(g[a] > 0.0)) return kInf;
    const double p = counts[a] / nd;
    s += p * std::log(p / g[a]);
  }
  return std::max(s, 0.0);
}

void check_stream(std::span<const std::uint32_t> stream, std::size_t m) {
  for (std::uint32_t x : stream) {
    if (x >= m) throw DataError("letter index outside the alphabet");
  }
}

}  // namespace

const char* to_string(Decision d) noexcept { return d == Decision::kChange ? "change" : "no-alarm"; }

const char* to_string(StepDecision d) noexcept {
  switch (d) {
    case StepDecision::kContinue: return "continue";
    case StepDecision::kRestart: return "restart";
    case StepDecision::kAlarm: return "alarm";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Fixed-window IPT

std::size_t corollary_stride(std::size_t n) noexcept { return (n + 2) / 2; }

namespace {

ProjectionResult fixed_projection(const FixedIptConfig& c) {
  if (c.n == 0) throw InvalidArgument("window size must be at least 1");
  if (c.stride == 0 || c.stride > c.n) throw InvalidArgument("stride must lie in [1, n]");
  if (!(c.c_d >= 0.0)) throw InvalidArgument("c_d must be non-negative");
  if (!same_alphabet(c.f0.alphabet_ptr(), c.q.alphabet_ptr())) {
    throw InvalidArgument("f0 and q use different alphabets");
  }
  return i_project(c.f0, c.q, c.c_s - c.q.offset());
}

}  // namespace

FixedIpt::FixedIpt(FixedIptConfig config) : config_(std::move(config)), projection_(fixed_projection(config_)) {}

bool FixedIpt::alarms(std::span<const std::uint32_t> counts) const {
  if (!(q_raw_from_counts(config_.q, counts) >= config_.c_s)) return false;
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return kl_from_counts(counts, n, projection_.f_star.probs()) >= config_.c_d;
}

AlarmReport FixedIpt::run(std::span<const std::uint32_t> stream) const {
  check_stream(stream, config_.f0.size());
  AlarmReport report;
  if (stream.size() < config_.n) return report;
  SlidingWindow window(config_.q, config_.n);
  window.set_reference(projection_.f_star.probs());
  for (std::size_t k = 1; k <= stream.size(); ++k) {
    window.push(stream[k - 1]);
    if (k < config_.n || (k - config_.n) % config_.stride != 0) continue;
    TraceRow row{k, window.q_raw(), std::nullopt, config_.n};
    bool alarm = false;
    if (row.s >= config_.c_s) {
      row.d = window.kl_to_reference();
      alarm = *row.d >= config_.c_d;
      if (!alarm) report.restarts.push_back(k);
    }
    if (config_.record_trace) report.trace.push_back(row);
    if (alarm) {
      report.alarm_time = k;
      report.decision = Decision::kChange;
      break;
    }
  }
  return report;
}

AlarmReport fixed_ipt_run(const FixedIptConfig& config, std::span<const double> stream) {
  const FixedIpt detector(config);
  return detector.run(to_indices(stream, config.f0.alphabet()));
}

// ---------------------------------------------------------------------------
// Quickest-change IPT

double cd_schedule(std::size_t n, const QuickestIptConfig& config) {
  const double q_floor = config.q_floor - config.q.offset();
  return static_cast<double>(n) <= (1.0 + config.rho) * config.c_s / q_floor ? 0.0 : config.c_d;
}

QuickestIpt::QuickestIpt(QuickestIptConfig config, std::shared_ptr<const ProjectionCache> cache)
    : config_(std::move(config)),
      cache_(std::move(cache)),
      offset_(config_.q.offset()),
      q_floor_centered_(config_.q_floor - config_.q.offset()),
      counts_(config_.f0.size(), 0) {
  if (!same_alphabet(config_.f0.alphabet_ptr(), config_.q.alphabet_ptr())) {
    throw InvalidArgument("f0 and q use different alphabets");
  }
  if (!(config_.rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (!(config_.c_d >= 0.0)) throw InvalidArgument("c_d must be non-negative");
  if (!(config_.c_s > 0.0)) throw InvalidArgument("c_s must be positive");
  if (!(q_floor_centered_ > 0.0)) throw InvalidArgument("q_floor must exceed the q offset");
  if (config_.max_lookback && *config_.max_lookback == 0) throw InvalidArgument("max_lookback must be positive");
  if (!cache_) {
    cache_ = std::make_shared<const ProjectionCache>(config_.f0, config_.q, config_.c_s);
  } else if (cache_->c_s() != config_.c_s || !(cache_->f0() == config_.f0) ||
             cache_->q().kind() != config_.q.kind() || cache_->q().offset() != offset_) {
    throw InvalidArgument("projection cache was built for a different configuration");
  }
}

void QuickestIpt::reset() {
  k_ = 0;
  restart();
  tau_ = 1;
  last_ = TraceRow{};
}

void QuickestIpt::restart() {
  tau_ = k_ + 1;
  s_ = 0.0;
  d_.reset();
  for (std::uint32_t x : window_) --counts_[x];
  window_.clear();
  history_.clear();
}

DetectorState QuickestIpt::state() const {
  DetectorState st;
  st.k = k_;
  st.tau = tau_;
  st.s_stat = s_;
  st.d_stat = d_;
  st.n_k = window_.size();
  st.i_k = k_ + 1 - window_.size();
  st.window_counts = counts_;
  return st;
}

void QuickestIpt::update_general(std::uint32_t letter) {
  history_.push_back(letter);
  if (config_.max_lookback && history_.size() > *config_.max_lookback) {
    history_.erase(history_.begin());
  }
  // Scan start indices from k down to the oldest kept one; ">=" keeps the
  // smallest maximizing start.
  const auto letters = config_.q.alphabet().letters();
  double s1 = 0.0, s2 = 0.0, best = 0.0;
  std::size_t best_len = 0;
  for (std::size_t len = 1; len <= history_.size(); ++len) {
    const double a = letters[history_[history_.size() - len]];
    s1 += a;
    s2 += a * a;
    const double n = static_cast<double>(len);
    const double mean = s1 / n;
    const double value = n * (config_.q.kind() == QKind::kVariance ? s2 / n - mean * mean : mean) - n * offset_;
    if (value >= best) {
      best = value;
      best_len = len;
    }
  }
  s_ = best;
  for (std::uint32_t x : window_) --counts_[x];
  window_.assign(history_.end() - static_cast<std::ptrdiff_t>(best_len), history_.end());
  for (std::uint32_t x : window_) ++counts_[x];
}

double QuickestIpt::rllf() const {
  const auto f_star = cache_->get(window_.size());
  if (!f_star) return kInf;
  return kl_from_counts(counts_, window_.size(), f_star->f_star.probs());
}

StepDecision QuickestIpt::step(std::uint32_t letter) {
  if (letter >= counts_.size()) throw DataError("letter index outside the alphabet");
  ++k_;
  d_.reset();
  if (config_.q.is_linear()) {
    // S_k = (S_{k-1} + q(x))^+; a zero sum keeps the longer window.
    const double x = config_.q.weights()[letter] - offset_;
    if (s_ + x >= 0.0) {
      s_ += x;
      window_.push_back(letter);
      ++counts_[letter];
    } else {
      s_ = 0.0;
      for (std::uint32_t y : window_) --counts_[y];
      window_.clear();
    }
  } else {
    update_general(letter);
  }

  last_ = TraceRow{k_, s_, std::nullopt, window_.size()};
  if (!(s_ >= config_.c_s)) return StepDecision::kContinue;

  const double threshold = cd_schedule(window_.size(), config_);
  if (threshold <= 0.0 && !config_.record_trace) return StepDecision::kAlarm;
  d_ = rllf();
  last_.d = d_;
  if (*d_ >= threshold) return StepDecision::kAlarm;
  restart();
  return StepDecision::kRestart;
}

AlarmReport quickest_ipt_run(QuickestIpt& detector, std::span<const std::uint32_t> stream) {
  AlarmReport report;
  const bool trace = detector.config().record_trace;
  for (std::uint32_t x : stream) {
    const StepDecision decision = detector.step(x);
    if (trace) report.trace.push_back(detector.last_step());
    if (decision == StepDecision::kRestart) {
      report.restarts.push_back(detector.tau());
    } else if (decision == StepDecision::kAlarm) {
      report.alarm_time = detector.k();
      report.decision = Decision::kChange;
      break;
    }
  }
  return report;
}

AlarmReport quickest_ipt_run(const QuickestIptConfig& config, std::span<const double> stream) {
  QuickestIpt detector(config);
  const auto indices = to_indices(stream, config.f0.alphabet());
  return quickest_ipt_run(detector, indices);
}

// ---------------------------------------------------------------------------
// FMA and GLRT

AlarmReport fma_run(std::size_t window, double threshold, const QFunction& q, std::span<const std::uint32_t> stream,
                    bool record_trace) {
  check_stream(stream, q.alphabet().size());
  AlarmReport report;
  SlidingWindow win(q, window);
  for (std::size_t k = 1; k <= stream.size(); ++k) {
    win.push(stream[k - 1]);
    if (k < window) continue;
    const double s = win.q_raw();
    if (record_trace) report.trace.push_back({k, s, std::nullopt, window});
    if (s >= threshold) {
      report.alarm_time = k;
      report.decision = Decision::kChange;
      break;
    }
  }
  return report;
}

AlarmReport fma_run(std::size_t window, double threshold, const QFunction& q, std::span<const double> stream,
                    bool record_trace) {
  return fma_run(window, threshold, q, to_indices(stream, q.alphabet()), record_trace);
}

double glrt_statistic(std::span<const std::uint32_t> counts, const Pmf& f0, const QFunction& q, double q_floor) {
  if (counts.size() != f0.size()) throw InvalidArgument("count vector does not match alphabet");
  std::size_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw InvalidArgument("GLRT statistic needs a non-empty window");
  const double kl0 = kl_from_counts(counts, n, f0.probs());
  if (std::isinf(kl0)) return kInf;
  std::vector<double> p(counts.size());
  for (std::size_t a = 0; a < p.size(); ++a) p[a] = static_cast<double>(counts[a]) / static_cast<double>(n);
  const Pmf f_hat = Pmf::from_weights(f0.alphabet_ptr(), std::move(p));
  const double inner = reverse_project(f_hat, q, q_floor - q.offset()).kl_value;
  return static_cast<double>(n) * (kl0 - inner);
}

GlrtStatCache::GlrtStatCache(Pmf f0, QFunction q, double q_floor)
    : f0_(std::move(f0)), q_(std::move(q)), q_floor_(q_floor) {}

double GlrtStatCache::operator()(std::span<const std::uint32_t> counts) {
  std::vector<std::uint32_t> key(counts.begin(), counts.end());
  auto it = table_.find(key);
  if (it != table_.end()) return it->second;
  const double g = glrt_statistic(counts, f0_, q_, q_floor_);
  table_.emplace(std::move(key), g);
  return g;
}

AlarmReport glrt_run(std::size_t window, double threshold, const QFunction& q, double q_floor, const Pmf& f0,
                     std::span<const std::uint32_t> stream, bool record_trace) {
  check_stream(stream, f0.size());
  AlarmReport report;
  SlidingWindow win(q, window);
  for (std::size_t k = 1; k <= stream.size(); ++k) {
    win.push(stream[k - 1]);
    if (k < window) continue;
    const double g = glrt_statistic(win.counts(), f0, q, q_floor);
    if (record_trace) report.trace.push_back({k, g, std::nullopt, window});
    if (g >= threshold) {
      report.alarm_time = k;
      report.decision = Decision::kChange;
      break;
    }
  }
  return report;
}

AlarmReport glrt_run(std::size_t window, double threshold, const QFunction& q, double q_floor, const Pmf& f0,
                     std::span<const double> stream, bool record_trace) {
  return glrt_run(window, threshold, q, q_floor, f0, to_indices(stream, f0.alphabet()), record_trace);
}

}  // namespace ipt
