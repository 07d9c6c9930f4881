#include "ipt/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <utility>

#include "ipt/detectors.hpp"
#include "ipt/errors.hpp"
#include "ipt/projection.hpp"
#include "ipt/window.hpp"

namespace ipt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ99 = 2.5758293035489004;

// Seed-stream tags.
constexpr std::uint64_t kTagF1 = 0xf1;
constexpr std::uint64_t kTagNull = 0x10;
constexpr std::uint64_t kTagChange = 0x11;

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * static_cast<double>(i));
  return out;
}

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

// ---------------------------------------------------------------------------
// Threshold bookkeeping shared by the ROC harnesses.

enum class Family { kIpt, kFma, kGlrt };

struct Threshold {
  Family family;
  double c_s;
  double c_d;
  std::size_t c_s_index;  // into c_s_sweep for IPT
};

std::vector<Threshold> thresholds(const ExperimentConfig& c) {
  std::vector<Threshold> out;
  for (std::size_t i = 0; i < c.c_s_sweep.size(); ++i) {
    for (double cd : c.c_d_sweep) out.push_back({Family::kIpt, c.c_s_sweep[i], cd, i});
  }
  for (double t : c.fma_sweep) out.push_back({Family::kFma, t, kNaN, 0});
  for (double t : c.glrt_sweep) out.push_back({Family::kGlrt, t, kNaN, 0});
  return out;
}

const char* family_name(Family f) {
  switch (f) {
    case Family::kIpt: return "ipt";
    case Family::kFma: return "fma";
    case Family::kGlrt: return "glrt";
  }
  return "";
}

// Largest statistics seen over the windows of one trial. d[i] is the largest
// RLLF among windows whose q crossed c_s_sweep[i] (-inf if none did).
struct TrialStats {
  double q = -kInf;
  std::vector<double> d;
  double g = -kInf;
};

bool alarms(const Threshold& t, const TrialStats& s) {
  switch (t.family) {
    case Family::kIpt: return s.d[t.c_s_index] >= t.c_d;
    case Family::kFma: return s.q >= t.c_s;
    case Family::kGlrt: return s.g >= t.c_s;
  }
  return false;
}

// I(f_hat || g) from counts with a precomputed ln(c / n) table.
double kl_counts(std::span<const std::uint32_t> counts, std::span<const double> log_frac, std::span<const double> log_g,
                 double n) {
  double s = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    const std::uint32_t c = counts[a];
    if (c == 0) continue;
    if (std::isinf(log_g[a])) return kInf;
    s += c * (log_frac[c] - log_g[a]);
  }
  return std::max(0.0, s / n);
}

std::vector<double> logs_of(std::span<const double> p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] > 0.0 ? std::log(p[i]) : -kInf;
  return out;
}

std::vector<double> log_fraction_table(std::size_t n) {
  std::vector<double> t(n + 1, -kInf);
  for (std::size_t c = 1; c <= n; ++c) t[c] = std::log(static_cast<double>(c) / static_cast<double>(n));
  return t;
}

std::vector<std::vector<double>> ipt_projections(const ExperimentConfig& c, const Pmf& f0, const QFunction& q) {
  std::vector<std::vector<double>> out;
  for (double cs : c.c_s_sweep) out.push_back(logs_of(i_project(f0, q, cs - q.offset()).f_star.probs()));
  return out;
}

CurvePoint make_point(const Threshold& t, double x, double x_ci, double y, double ci) {
  CurvePoint p;
  p.detector = family_name(t.family);
  p.c_s = t.c_s;
  p.c_d = t.c_d;
  p.x = x;
  p.x_ci = x_ci;
  p.y = y;
  p.ci = ci;
  return p;
}

// Builds ROC points from per-distribution alarm counts: index 0 is the
// pre-change run, the rest are the (f1, t1) cells.
std::vector<CurvePoint> roc_points(const std::vector<Threshold>& ts, const std::vector<std::size_t>& null_alarms,
                                   std::size_t null_trials, const std::vector<std::vector<std::size_t>>& misses,
                                   std::size_t change_trials) {
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::size_t worst = 0;
    for (const auto& cell : misses) worst = std::max(worst, cell[i]);
    const double x = null_trials ? static_cast<double>(null_alarms[i]) / null_trials : 0.0;
    const double x_ci = null_trials ? wilson_interval(null_alarms[i], null_trials).half_width : 0.0;
    const double y = static_cast<double>(worst) / change_trials;
    out.push_back(make_point(ts[i], x, x_ci, y, wilson_interval(worst, change_trials).half_width));
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

const char* to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::kCht: return "cht";
    case Scenario::kTcd: return "tcd";
    case Scenario::kQcd: return "qcd";
    case Scenario::kBench: return "bench";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "cht") return Scenario::kCht;
  if (name == "tcd") return Scenario::kTcd;
  if (name == "qcd") return Scenario::kQcd;
  if (name == "bench") return Scenario::kBench;
  throw InvalidArgument("unknown scenario '" + name + "'");
}

const char* to_string(F1Sampler s) noexcept { return s == F1Sampler::kBoundary ? "boundary" : "dirichlet"; }

F1Sampler f1_sampler_from_string(const std::string& name) {
  if (name == "dirichlet") return F1Sampler::kDirichlet;
  if (name == "boundary") return F1Sampler::kBoundary;
  throw InvalidArgument("unknown post-change sampler '" + name + "'");
}

AlphabetPtr ExperimentConfig::alphabet_ptr() const { return Alphabet::make(alphabet); }

Pmf ExperimentConfig::f0_pmf() const { return Pmf(alphabet_ptr(), f0); }

QFunction ExperimentConfig::q() const {
  switch (q_kind) {
    case QKind::kMean: return QFunction::mean(alphabet_ptr(), offset);
    case QKind::kVariance: return QFunction::variance(alphabet_ptr(), offset);
    case QKind::kLogLikelihoodRatio: break;
  }
  throw Unsupported("experiments support the mean and variance q kinds");
}

void ExperimentConfig::validate() const {
  const Pmf p0 = f0_pmf();
  const QFunction qf = q();
  if (trials == 0) throw InvalidArgument("trials must be at least 1");
  if (n == 0) throw InvalidArgument("n must be at least 1");
  if (!(qf(p0) < q_floor - offset)) throw InvalidArgument("q(f0) must lie below q_floor");
  if (scenario == Scenario::kBench) {
    if (bench_sizes.empty()) throw InvalidArgument("bench needs at least one (m, n) pair");
    return;
  }
  if (c_s_sweep.empty() && fma_sweep.empty() && glrt_sweep.empty()) {
    throw InvalidArgument("threshold sweeps must not all be empty");
  }
  if (!c_s_sweep.empty() && c_d_sweep.empty()) throw InvalidArgument("IPT needs a c_d sweep");
  for (double cd : c_d_sweep) {
    if (!(cd >= 0.0)) throw InvalidArgument("c_d values must be non-negative");
  }
  if (f1_list.empty() && post_change_samples == 0) throw InvalidArgument("need at least one post-change pmf");
  if (scenario == Scenario::kTcd) {
    if (window == 0 || window > n) throw InvalidArgument("tcd window must lie in [1, n]");
  }
  if (scenario == Scenario::kQcd) {
    if (change_times.empty()) throw InvalidArgument("qcd needs at least one change time");
    for (auto t : change_times) {
      if (t == 0) throw InvalidArgument("change times are 1-based");
    }
    if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  }
}

ExperimentConfig cht_defaults() {
  ExperimentConfig c;
  c.scenario = Scenario::kCht;
  // Window means live on the 1/25 lattice; thresholds sit between its points.
  for (int j = 0; j < 50; ++j) c.c_s_sweep.push_back((2.0 * j - 49.0) / 50.0);
  c.c_d_sweep = powers_of_two(-8, -3);
  c.fma_sweep = c.c_s_sweep;
  c.glrt_sweep = range(-20.0, 28.0, 0.25);
  c.trials = 10000;
  c.post_change_samples = 100;
  return c;
}

ExperimentConfig tcd_defaults() {
  ExperimentConfig c;
  c.scenario = Scenario::kTcd;
  c.alphabet.clear();
  for (int a = -5; a <= 5; ++a) c.alphabet.push_back(a);
  const Pmf gaussian = discrete_gaussian(c.alphabet_ptr(), 1.0);
  c.f0.assign(gaussian.probs().begin(), gaussian.probs().end());
  c.q_kind = QKind::kVariance;
  c.offset = 1.5;
  c.q_floor = 2.0;
  c.n = 80;
  c.n_alpha = 200;
  c.window = 20;
  c.c_s_sweep = range(1.0, 5.0, 0.05);
  c.c_d_sweep = powers_of_two(-8, -3);
  c.c_d_sweep.insert(c.c_d_sweep.begin(), 0.0);
  for (double v : {0.25, 0.5, 1.0}) c.c_d_sweep.push_back(v);
  c.fma_sweep = c.c_s_sweep;
  c.glrt_sweep = range(0.0, 60.0, 0.25);
  c.trials = 1000;
  c.post_change_samples = 100;
  c.f1_sampler = F1Sampler::kBoundary;
  return c;
}

ExperimentConfig qcd_defaults() {
  ExperimentConfig c;
  c.scenario = Scenario::kQcd;
  c.offset = 0.125;
  c.q_floor = 0.25;
  c.n = 25;
  c.c_s_sweep = {2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0};
  c.c_d_sweep = {0.05};
  c.fma_sweep = {0.22, 0.3, 0.38, 0.46, 0.54};
  c.glrt_sweep = {2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
  c.rho = 1.0;
  c.trials = 200;
  c.post_change_samples = 20;
  c.change_times = {1, 12, 25, 50};
  c.max_steps = 200000;
  return c;
}

ExperimentConfig bench_defaults() {
  ExperimentConfig c;
  c.scenario = Scenario::kBench;
  c.bench_sizes = {{3, 25}, {10, 80}, {30, 250}, {100, 800}, {300, 2500}, {1000, 8000}};
  c.bench_steps = 20000;
  c.trials = 1;
  return c;
}

ExperimentConfig defaults_for(Scenario s) {
  switch (s) {
    case Scenario::kCht: return cht_defaults();
    case Scenario::kTcd: return tcd_defaults();
    case Scenario::kQcd: return qcd_defaults();
    case Scenario::kBench: return bench_defaults();
  }
  return cht_defaults();
}

// ---------------------------------------------------------------------------
// Statistics helpers

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 0.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {center, half};
}

Pmf variance_matched_tilt(const Pmf& f0, double variance) {
  const auto letters = f0.alphabet().letters();
  const auto p = f0.probs();
  double lo_letter = kInf, hi_letter = -kInf;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] > 0.0) {
      lo_letter = std::min(lo_letter, letters[a]);
      hi_letter = std::max(hi_letter, letters[a]);
    }
  }
  const double reach = std::max(lo_letter * lo_letter, hi_letter * hi_letter);
  std::vector<double> f(p.size());
  auto tilt = [&](double theta) {
    double shift = -kInf;
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (p[a] > 0.0) shift = std::max(shift, theta * letters[a] * letters[a]);
    }
    double z = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
      f[a] = p[a] > 0.0 ? p[a] * std::exp(theta * letters[a] * letters[a] - shift) : 0.0;
      z += f[a];
    }
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
      f[a] /= z;
      m1 += f[a] * letters[a];
      m2 += f[a] * letters[a] * letters[a];
    }
    return m2 - m1 * m1;
  };
  // Variance is increasing in theta for symmetric supports; the bracket is
  // capped where exp(theta a^2) saturates.
  const double cap = 100.0 / std::max(reach, 1e-300);
  double lo = -cap, hi = cap;
  const double target = std::clamp(variance, tilt(lo), tilt(hi));
  for (int it = 0; it < kMaxBisectionIterations && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tilt(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  tilt(hi);
  return Pmf::from_weights(f0.alphabet_ptr(), f);
}

Pmf discrete_gaussian(const AlphabetPtr& alphabet, double variance) {
  return variance_matched_tilt(Pmf::uniform(alphabet), variance);
}

std::vector<Pmf> sample_post_change(const ExperimentConfig& config, std::uint64_t seed) {
  const AlphabetPtr alphabet = config.alphabet_ptr();
  const QFunction q = config.q();
  const Pmf f0 = config.f0_pmf();
  std::vector<Pmf> out;
  if (!config.f1_list.empty()) {
    for (const auto& probs : config.f1_list) {
      Pmf f1(alphabet, probs);
      if (q.raw(f1.probs()) < config.q_floor - 1e-9) {
        throw InvalidArgument("an explicit post-change pmf lies below q_floor");
      }
      out.push_back(std::move(f1));
    }
    return out;
  }
  Engine rng(derive_seed(seed, {kTagF1}));
  constexpr std::size_t kMaxAttempts = 10'000'000;
  std::size_t attempts = 0;
  std::vector<double> mix(f0.size());
  while (out.size() < config.post_change_samples) {
    if (++attempts > kMaxAttempts) throw Infeasible("post-change sampler rejected too many draws");
    Pmf d = dirichlet(rng, alphabet);
    if (q.raw(d.probs()) < config.q_floor) continue;
    if (config.f1_sampler == F1Sampler::kDirichlet) {
      out.push_back(std::move(d));
      continue;
    }
    // q is quasiconcave and q(f0) < q_floor <= q(d), so the segment crosses
    // the level set exactly once.
    auto at = [&](double t) {
      for (std::size_t a = 0; a < mix.size(); ++a) mix[a] = (1.0 - t) * f0[a] + t * d[a];
      return q.raw(mix);
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < kMaxBisectionIterations && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (at(mid) < config.q_floor) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    at(hi);
    out.push_back(Pmf::from_weights(alphabet, mix));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Composite hypothesis testing

std::vector<CurvePoint> simulate_roc_cht(const ExperimentConfig& config) {
  config.validate();
  const Pmf f0 = config.f0_pmf();
  const QFunction q = config.q();
  const std::size_t m = f0.size(), n = config.n;
  const std::vector<Pmf> f1s = sample_post_change(config, config.seed);
  const auto log_fstar = ipt_projections(config, f0, q);
  const auto log_frac = log_fraction_table(n);
  const auto ts = thresholds(config);

  // Only the window's type matters, so tally types per distribution.
  using Type = std::vector<std::uint32_t>;
  std::vector<std::map<Type, std::size_t>> tallies(f1s.size() + 1);
  parallel_for(tallies.size(), config.threads, [&](std::size_t d) {
    const Pmf& dist = d == 0 ? f0 : f1s[d - 1];
    const AliasSampler sampler(dist.probs());
    Engine rng(derive_seed(config.seed, {d == 0 ? kTagNull : kTagChange, d}));
    Type counts(m);
    for (std::size_t t = 0; t < config.trials; ++t) {
      std::fill(counts.begin(), counts.end(), 0u);
      for (std::size_t i = 0; i < n; ++i) ++counts[sampler(rng)];
      ++tallies[d][counts];
    }
  });

  std::map<Type, TrialStats> stats;
  for (const auto& tally : tallies) {
    for (const auto& [type, count] : tally) stats.try_emplace(type);
  }
  GlrtStatCache glrt(f0, q, config.q_floor);
  const bool need_glrt = !config.glrt_sweep.empty();
  for (auto& [type, s] : stats) {
    s.q = q_raw_from_counts(q, type);
    s.d.assign(config.c_s_sweep.size(), -kInf);
    for (std::size_t i = 0; i < config.c_s_sweep.size(); ++i) {
      if (s.q >= config.c_s_sweep[i]) s.d[i] = kl_counts(type, log_frac, log_fstar[i], static_cast<double>(n));
    }
    s.g = need_glrt ? glrt(type) : -kInf;
  }

  auto alarm_counts = [&](const std::map<Type, std::size_t>& tally) {
    std::vector<std::size_t> out(ts.size(), 0);
    for (const auto& [type, count] : tally) {
      const TrialStats& s = stats.at(type);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        if (alarms(ts[i], s)) out[i] += count;
      }
    }
    return out;
  };
  const auto null_alarms = alarm_counts(tallies[0]);
  std::vector<std::vector<std::size_t>> misses;
  for (std::size_t d = 1; d < tallies.size(); ++d) {
    auto hits = alarm_counts(tallies[d]);
    for (auto& h : hits) h = config.trials - h;
    misses.push_back(std::move(hits));
  }
  return roc_points(ts, null_alarms, config.trials, misses, config.trials);
}

// ---------------------------------------------------------------------------
// Transient change detection

namespace {

// Rolling-window scan shared by the pre- and post-change runs of the
// transient scenario.
class TcdScanner {
 public:
  TcdScanner(const ExperimentConfig& config, const Pmf& f0, const QFunction& q,
             const std::vector<std::vector<double>>& log_fstar)
      : config_(config),
        f0_(f0),
        q_(q),
        log_fstar_(log_fstar),
        log_frac_(log_fraction_table(config.window)),
        log_f0_(logs_of(f0.probs())),
        letters_(f0.alphabet().letters().begin(), f0.alphabet().letters().end()),
        counts_(f0.size(), 0) {}

  // Statistics over windows ending at k in [first_end, last_end] (1-based).
  TrialStats scan(std::span<const std::uint32_t> stream, std::size_t first_end, std::size_t last_end) {
    TrialStats s;
    s.d.assign(config_.c_s_sweep.size(), -kInf);
    const std::size_t w = config_.window;
    const double wd = static_cast<double>(w);
    std::fill(counts_.begin(), counts_.end(), 0u);
    for (std::size_t k = 1; k <= last_end; ++k) {
      ++counts_[stream[k - 1]];
      if (k > w) --counts_[stream[k - 1 - w]];
      if (k < first_end || k < w) continue;
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t a = 0; a < counts_.size(); ++a) {
        s1 += counts_[a] * letters_[a];
        s2 += counts_[a] * letters_[a] * letters_[a];
      }
      const double mean = s1 / wd;
      const double var = s2 / wd - mean * mean;
      s.q = std::max(s.q, var);
      for (std::size_t i = 0; i < config_.c_s_sweep.size(); ++i) {
        if (var >= config_.c_s_sweep[i]) s.d[i] = std::max(s.d[i], kl_counts(counts_, log_frac_, log_fstar_[i], wd));
      }
      if (!config_.glrt_sweep.empty()) s.g = std::max(s.g, glrt(s1, s2, var));
    }
    return s;
  }

 private:
  // n [I(f_hat||f0) - I(f_hat||f1)] = sum_a c_a ln(f1(a)/f0(a)) with f1 the
  // tilt of f0 matching the window variance (the direct estimate of sigma_1^2).
  double glrt(double s1, double s2, double var) {
    const auto key = std::make_pair(s1, s2);
    if (auto it = glrt_memo_.find(key); it != glrt_memo_.end()) return it->second;
    const Pmf f1 = variance_matched_tilt(f0_, var);
    double g = 0.0;
    for (std::size_t a = 0; a < counts_.size(); ++a) {
      if (counts_[a] == 0) continue;
      g += counts_[a] * (std::log(f1[a]) - log_f0_[a]);
    }
    glrt_memo_.emplace(key, g);
    return g;
  }

  const ExperimentConfig& config_;
  const Pmf& f0_;
  const QFunction& q_;
  const std::vector<std::vector<double>>& log_fstar_;
  std::vector<double> log_frac_;
  std::vector<double> log_f0_;
  std::vector<double> letters_;
  std::vector<std::uint32_t> counts_;
  std::map<std::pair<double, double>, double> glrt_memo_;
};

}  // namespace

std::vector<CurvePoint> simulate_roc_tcd(const ExperimentConfig& config) {
  config.validate();
  if (config.q_kind != QKind::kVariance) throw InvalidArgument("tcd uses the variance q kind");
  const Pmf f0 = config.f0_pmf();
  const QFunction q = config.q();
  const std::vector<Pmf> f1s = sample_post_change(config, config.seed);
  const auto log_fstar = ipt_projections(config, f0, q);
  const auto ts = thresholds(config);
  const std::size_t w = config.window, n = config.n;
  const std::size_t null_trials = config.fa_trials.value_or(config.trials);

  // Job 0 is the pre-change run; job j >= 1 covers f1s[j-1] at every t1.
  std::vector<std::vector<std::size_t>> null_slot(1);
  std::vector<std::vector<std::vector<std::size_t>>> change_slots(f1s.size());
  const AliasSampler f0_sampler(f0.probs());
  parallel_for(f1s.size() + 1, config.threads, [&](std::size_t job) {
    TcdScanner scanner(config, f0, q, log_fstar);
    std::vector<std::uint32_t> stream;
    if (job == 0) {
      std::vector<std::size_t> alarm_counts(ts.size(), 0);
      if (config.n_alpha > 0) {
        for (std::size_t t = 0; t < null_trials; ++t) {
          Engine rng(derive_seed(config.seed, {kTagNull, t}));
          stream.clear();
          f0_sampler.fill(rng, w + config.n_alpha - 1, stream);
          const TrialStats s = scanner.scan(stream, w, w + config.n_alpha - 1);
          for (std::size_t i = 0; i < ts.size(); ++i) alarm_counts[i] += alarms(ts[i], s);
        }
      }
      null_slot[0] = std::move(alarm_counts);
      return;
    }
    const std::size_t j = job - 1;
    const AliasSampler f1_sampler(f1s[j].probs());
    auto& cells = change_slots[j];
    for (std::size_t t1 = 1; t1 <= w; ++t1) {
      std::vector<std::size_t> miss(ts.size(), 0);
      for (std::size_t t = 0; t < config.trials; ++t) {
        Engine rng(derive_seed(config.seed, {kTagChange, j, t1, t}));
        stream.clear();
        f0_sampler.fill(rng, t1 - 1, stream);
        f1_sampler.fill(rng, n, stream);
        const TrialStats s = scanner.scan(stream, std::max(w, t1), t1 + n - 1);
        for (std::size_t i = 0; i < ts.size(); ++i) miss[i] += !alarms(ts[i], s);
      }
      cells.push_back(std::move(miss));
    }
  });

  std::vector<std::vector<std::size_t>> misses;
  for (auto& cells : change_slots) {
    for (auto& cell : cells) misses.push_back(std::move(cell));
  }
  if (config.n_alpha == 0) null_slot[0].assign(ts.size(), 0);
  return roc_points(ts, null_slot[0], config.n_alpha ? null_trials : 0, misses, config.trials);
}

// ---------------------------------------------------------------------------
// Quickest change detection

namespace {

class StreamDetector {
 public:
  virtual ~StreamDetector() = default;
  virtual void reset() = 0;
  /// True when the detector alarms at this sample.
  virtual bool step(std::uint32_t x) = 0;
};

class QuickestStream final : public StreamDetector {
 public:
  QuickestStream(QuickestIptConfig config, std::shared_ptr<const ProjectionCache> cache)
      : detector_(std::move(config), std::move(cache)) {}
  void reset() override { detector_.reset(); }
  bool step(std::uint32_t x) override { return detector_.step(x) == StepDecision::kAlarm; }

 private:
  QuickestIpt detector_;
};

class FmaStream final : public StreamDetector {
 public:
  FmaStream(const QFunction& q, std::size_t n, double threshold) : window_(q, n), threshold_(threshold) {}
  void reset() override { window_.clear(); }
  bool step(std::uint32_t x) override {
    window_.push(x);
    return window_.full() && window_.q_raw() >= threshold_;
  }

 private:
  SlidingWindow window_;
  double threshold_;
};

class GlrtStream final : public StreamDetector {
 public:
  GlrtStream(const QFunction& q, std::size_t n, double threshold, std::shared_ptr<GlrtStatCache> cache)
      : window_(q, n), threshold_(threshold), cache_(std::move(cache)) {}
  void reset() override { window_.clear(); }
  bool step(std::uint32_t x) override {
    window_.push(x);
    return window_.full() && (*cache_)(window_.counts()) >= threshold_;
  }

 private:
  SlidingWindow window_;
  double threshold_;
  std::shared_ptr<GlrtStatCache> cache_;
};

struct QcdDetectorSpec {
  Threshold threshold;
  std::function<std::unique_ptr<StreamDetector>()> make;
};

struct RunSummary {
  double mean = 0.0;
  double half_width = 0.0;
  double censored = 0.0;
};

RunSummary summarize(const std::vector<double>& values, std::size_t censored) {
  RunSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.half_width = values.size() > 1 ? kZ99 * std::sqrt(ss / (n - 1.0) / n) : 0.0;
  s.censored = static_cast<double>(censored) / n;
  return s;
}

}  // namespace

std::vector<CurvePoint> simulate_arl_wadd(const ExperimentConfig& config) {
  config.validate();
  if (config.q_kind != QKind::kMean) throw InvalidArgument("qcd uses the mean q kind");
  const Pmf f0 = config.f0_pmf();
  const QFunction q = config.q();
  const std::vector<Pmf> f1s = sample_post_change(config, config.seed);
  const AliasSampler f0_sampler(f0.probs());
  std::vector<AliasSampler> f1_samplers;
  for (const Pmf& f1 : f1s) f1_samplers.emplace_back(f1.probs());

  std::vector<QcdDetectorSpec> specs;
  for (std::size_t i = 0; i < config.c_s_sweep.size(); ++i) {
    const double cs = config.c_s_sweep[i];
    auto cache = std::make_shared<const ProjectionCache>(f0, q, cs);
    for (double cd : config.c_d_sweep) {
      QuickestIptConfig qc{f0, q, cs, cd, config.rho, config.q_floor, std::nullopt, false};
      specs.push_back({{Family::kIpt, cs, cd, i}, [qc, cache] { return std::make_unique<QuickestStream>(qc, cache); }});
    }
  }
  for (double t : config.fma_sweep) {
    specs.push_back({{Family::kFma, t, kNaN, 0}, [q, n = config.n, t] { return std::make_unique<FmaStream>(q, n, t); }});
  }
  if (!config.glrt_sweep.empty()) {
    for (double t : config.glrt_sweep) {
      specs.push_back({{Family::kGlrt, t, kNaN, 0}, [&config, f0, q, t] {
                         auto cache = std::make_shared<GlrtStatCache>(f0, q, config.q_floor);
                         return std::make_unique<GlrtStream>(q, config.n, t, cache);
                       }});
    }
  }

  const std::size_t cap = config.max_steps;
  const std::size_t cells = f1s.size() * config.change_times.size();
  // One job per (detector, trial); each job fills its run length and one
  // delay per (f1, t1) cell.
  struct Slot {
    std::size_t run_length = 0;
    std::vector<double> delays;
  };
  std::vector<Slot> slots(specs.size() * config.trials);
  parallel_for(specs.size(), config.threads, [&](std::size_t di) {
    auto detector = specs[di].make();
    for (std::size_t t = 0; t < config.trials; ++t) {
      Slot& slot = slots[di * config.trials + t];
      Engine rng(derive_seed(config.seed, {kTagNull, t}));
      detector->reset();
      std::size_t k = 0;
      while (k < cap) {
        ++k;
        if (detector->step(f0_sampler(rng))) break;
      }
      slot.run_length = k;
      slot.delays.reserve(cells);
      for (std::size_t j = 0; j < f1s.size(); ++j) {
        for (std::size_t t1 : config.change_times) {
          // Prefixes that already alarm are redrawn: the delay is conditional
          // on no alarm before the change.
          double delay = static_cast<double>(cap);
          for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
            Engine path(derive_seed(config.seed, {kTagChange, j, t1, t, attempt}));
            detector->reset();
            bool early = false;
            for (std::size_t i = 1; i < t1 && !early; ++i) early = detector->step(f0_sampler(path));
            if (early) continue;
            std::size_t steps = 0;
            while (steps < cap) {
              ++steps;
              if (detector->step(f1_samplers[j](path))) break;
            }
            delay = static_cast<double>(steps);
            break;
          }
          slot.delays.push_back(delay);
        }
      }
    }
  });

  std::vector<CurvePoint> out;
  for (std::size_t di = 0; di < specs.size(); ++di) {
    std::vector<double> runs;
    std::size_t censored = 0;
    for (std::size_t t = 0; t < config.trials; ++t) {
      const auto r = slots[di * config.trials + t].run_length;
      runs.push_back(static_cast<double>(r));
      censored += r >= cap;
    }
    const RunSummary arl = summarize(runs, censored);
    RunSummary worst;
    for (std::size_t c = 0; c < cells; ++c) {
      std::vector<double> delays;
      for (std::size_t t = 0; t < config.trials; ++t) delays.push_back(slots[di * config.trials + t].delays[c]);
      const RunSummary cell = summarize(delays, 0);
      if (c == 0 || cell.mean > worst.mean) worst = cell;
    }
    CurvePoint p = make_point(specs[di].threshold, arl.mean, arl.half_width, worst.mean, worst.half_width);
    p.censored = arl.censored;
    out.push_back(p);
  }
  return out;
}

std::vector<CurvePoint> simulate(const ExperimentConfig& config) {
  switch (config.scenario) {
    case Scenario::kCht: return simulate_roc_cht(config);
    case Scenario::kTcd: return simulate_roc_tcd(config);
    case Scenario::kQcd: return simulate_arl_wadd(config);
    case Scenario::kBench: break;
  }
  throw InvalidArgument("bench produces timing rows, not curves");
}

// ---------------------------------------------------------------------------
// Timing

std::vector<TimingRow> bench_step_time(const ExperimentConfig& config) {
  using Clock = std::chrono::steady_clock;
  constexpr double kBudgetSeconds = 0.4;
  std::vector<TimingRow> rows;
  for (const auto& [m, n] : config.bench_sizes) {
    if (m < 2 || n == 0) throw InvalidArgument("bench sizes need m >= 2 and n >= 1");
    const AlphabetPtr alphabet = Alphabet::integer_range(0, static_cast<int>(m) - 1);
    const Pmf f0 = Pmf::uniform(alphabet);
    const QFunction q = QFunction::mean(alphabet);
    const double mean = f0.mean();
    const double sd = std::sqrt(f0.variance());
    // A threshold half a standard error above the mean keeps the RLLF branch busy.
    const double c_s = mean + 0.5 * sd / std::sqrt(static_cast<double>(n));
    const double q_floor = mean + 2.0 * sd / std::sqrt(static_cast<double>(n));

    Engine rng(derive_seed(config.seed, {m, n}));
    const AliasSampler sampler(f0.probs());
    std::vector<std::uint32_t> stream;
    sampler.fill(rng, n + std::max<std::size_t>(config.bench_steps, 1), stream);

    auto time_it = [&](const std::string& name, const std::string& mode, auto&& prepare, auto&& step) {
      prepare();
      for (std::size_t i = 0; i < n; ++i) step(stream[i]);
      std::size_t done = 0;
      const auto start = Clock::now();
      auto now = start;
      while (done < config.bench_steps) {
        const std::size_t chunk = std::min<std::size_t>(64, config.bench_steps - done);
        for (std::size_t i = 0; i < chunk; ++i) step(stream[n + done + i]);
        done += chunk;
        now = Clock::now();
        if (std::chrono::duration<double>(now - start).count() > kBudgetSeconds && done >= 256) break;
      }
      const double ns = std::chrono::duration<double, std::nano>(now - start).count();
      rows.push_back({name, m, n, mode, ns / static_cast<double>(done)});
    };

    volatile double sink = 0.0;
    {
      SlidingWindow window(q, n);
      const auto fstar = i_project(f0, q, c_s);
      time_it(
          "ipt", "sliding", [&] { window.clear(); window.set_reference(fstar.f_star.probs()); },
          [&](std::uint32_t x) {
            window.push(x);
            const double s = window.q_raw();
            if (s >= c_s) sink = sink + window.kl_to_reference();
          });
    }
    {
      QuickestIptConfig qc{f0, q.with_offset(mean + 0.25 * sd), 4.0 * sd, 0.01, 1.0, q_floor + 0.25 * sd,
                           std::nullopt, false};
      QuickestIpt detector(qc);
      time_it(
          "ipt", "quickest", [&] { detector.reset(); },
          [&](std::uint32_t x) {
            if (detector.step(x) == StepDecision::kAlarm) detector.reset();
          });
    }
    {
      SlidingWindow window(q, n);
      time_it(
          "fma", "sliding", [&] { window.clear(); },
          [&](std::uint32_t x) {
            window.push(x);
            sink = sink + window.q_raw();
          });
    }
    {
      SlidingWindow window(q, n);
      time_it(
          "glrt", "window", [&] { window.clear(); },
          [&](std::uint32_t x) {
            window.push(x);
            if (window.full()) sink = sink + glrt_statistic(window.counts(), f0, q, q_floor);
          });
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Curves

std::vector<CurvePoint> lower_envelope(std::vector<CurvePoint> curve) {
  std::sort(curve.begin(), curve.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  std::vector<CurvePoint> out;
  for (const auto& p : curve) {
    if (out.empty() || p.y < out.back().y) {
      if (!out.empty() && out.back().x == p.x) continue;
      out.push_back(p);
    }
  }
  return out;
}

double auc(std::vector<CurvePoint> curve) {
  if (curve.empty()) throw InvalidArgument("auc needs at least one point");
  std::sort(curve.begin(), curve.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < curve.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < curve.size() && curve[j].x == curve[i].x) sum += curve[j++].y;
    pts.emplace_back(curve[i].x, sum / static_cast<double>(j - i));
    i = j;
  }
  double area = 0.0;
  double px = 0.0, py = pts.front().second;
  for (const auto& [x, y] : pts) {
    const double cx = std::clamp(x, 0.0, 1.0);
    area += (cx - px) * (py + y) / 2.0;
    px = cx;
    py = y;
  }
  area += (1.0 - px) * py;
  return area;
}

double envelope_auc(const std::vector<CurvePoint>& curve, const std::string& detector) {
  std::vector<CurvePoint> mine;
  for (const auto& p : curve) {
    if (p.detector == detector) mine.push_back(p);
  }
  return auc(lower_envelope(std::move(mine)));
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve) {
  os << "detector,c_s,c_d,x,y,ci\n";
  for (const auto& p : curve) {
    os << p.detector << ',' << format_double(p.c_s) << ',' << format_double(p.c_d) << ',' << format_double(p.x)
       << ',' << format_double(p.y) << ',' << format_double(p.ci) << '\n';
  }
}

void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows) {
  os << "detector,m,n,mode,ns_per_step\n";
  for (const auto& r : rows) {
    os << r.detector << ',' << r.m << ',' << r.n << ',' << r.mode << ',' << format_double(r.ns_per_step) << '\n';
  }
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ipt
