#include "ipt/json.hpp"

#include <cmath>
#include <istream>
#include <set>
#include <string>

namespace ipt {

namespace {

// JSON has no infinities; they travel as strings.
json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

}  // namespace

QKind q_kind_from_string(const std::string& name) {
  if (name == "mean") return QKind::kMean;
  if (name == "variance") return QKind::kVariance;
  if (name == "llr") return QKind::kLogLikelihoodRatio;
  throw InvalidArgument("unknown q kind '" + name + "'");
}

void to_json(json& j, const Pmf& f) {
  j = json{{"alphabet", std::vector<double>(f.alphabet().letters().begin(), f.alphabet().letters().end())},
           {"probs", std::vector<double>(f.probs().begin(), f.probs().end())}};
}

void to_json(json& j, const ProjectionResult& r) {
  j = json{{"f_star", r.f_star}, {"kl_value", number(r.kl_value)}, {"multipliers", r.multipliers},
           {"active", r.active}};
}

void to_json(json& j, const TraceRow& r) {
  j = json{{"k", r.k}, {"S", number(r.s)}, {"D", optional_number(r.d)}, {"n_k", r.n_k}};
}

void to_json(json& j, const AlarmReport& r) {
  j = json{{"alarm_time", r.alarm_time ? json(*r.alarm_time) : json(nullptr)},
           {"decision", to_string(r.decision)},
           {"restarts", r.restarts}};
  if (!r.trace.empty()) j["trace"] = r.trace;
}

void to_json(json& j, const BoundInputs& b) {
  j = json{{"n", b.n},        {"m", b.m},
           {"c_s", b.c_s},    {"c_d", b.c_d},
           {"q0", b.q0},      {"q_floor", b.q_floor},
           {"lipschitz", b.lipschitz}, {"rho", b.rho},
           {"n_alpha", b.n_alpha},     {"gamma", b.gamma}};
}

void from_json(const json& j, BoundInputs& b) {
  static const std::set<std::string> keys{"n", "m", "c_s", "c_d", "q0", "q_floor", "lipschitz", "rho", "n_alpha",
                                          "gamma"};
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw InvalidArgument("unknown bounds key '" + key + "'");
  }
  read_optional(j, "n", b.n);
  read_optional(j, "m", b.m);
  read_optional(j, "c_s", b.c_s);
  read_optional(j, "c_d", b.c_d);
  read_optional(j, "q0", b.q0);
  read_optional(j, "q_floor", b.q_floor);
  read_optional(j, "lipschitz", b.lipschitz);
  read_optional(j, "rho", b.rho);
  read_optional(j, "n_alpha", b.n_alpha);
  read_optional(j, "gamma", b.gamma);
}

void to_json(json& j, const BoundValue& v) { j = json{{"raw", number(v.raw)}, {"clamped", number(v.clamped)}}; }

void to_json(json& j, const TcdBounds& b) {
  j = json{{"fa_window", b.fa_window}, {"md", b.md},       {"nu", number(b.nu)},
           {"eta", number(b.eta)},     {"epochs", b.epochs}, {"vacuous", b.vacuous}};
}

void to_json(json& j, const ArlBound& b) {
  j = json{{"value", number(b.value)}, {"asymptote", number(b.asymptote)}, {"warning", b.warning}};
}

void to_json(json& j, const CurvePoint& p) {
  j = json{{"detector", p.detector}, {"c_s", number(p.c_s)}, {"c_d", number(p.c_d)},
           {"x", number(p.x)},       {"y", number(p.y)},     {"ci", number(p.ci)},
           {"x_ci", number(p.x_ci)}, {"censored", number(p.censored)}};
}

void to_json(json& j, const TimingRow& r) {
  j = json{{"detector", r.detector}, {"m", r.m}, {"n", r.n}, {"mode", r.mode}, {"ns_per_step", r.ns_per_step}};
}

void to_json(json& j, const RllfRow& r) {
  j = json{{"t", r.t},
           {"moving_avg", number(r.moving_avg)},
           {"s_crossed", r.s_crossed},
           {"rllf", optional_number(r.rllf)},
           {"change", r.change}};
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"scenario", to_string(c.scenario)},
           {"alphabet", c.alphabet},
           {"f0", c.f0},
           {"q_kind", to_string(c.q_kind)},
           {"offset", c.offset},
           {"q_floor", c.q_floor},
           {"n", c.n},
           {"n_alpha", c.n_alpha},
           {"window", c.window},
           {"c_s_sweep", c.c_s_sweep},
           {"c_d_sweep", c.c_d_sweep},
           {"fma_sweep", c.fma_sweep},
           {"glrt_sweep", c.glrt_sweep},
           {"rho", c.rho},
           {"trials", c.trials},
           {"fa_trials", c.fa_trials ? json(*c.fa_trials) : json(nullptr)},
           {"post_change_samples", c.post_change_samples},
           {"f1_sampler", to_string(c.f1_sampler)},
           {"f1_list", c.f1_list},
           {"change_times", c.change_times},
           {"max_steps", c.max_steps},
           {"bench_sizes", c.bench_sizes},
           {"bench_steps", c.bench_steps},
           {"seed", c.seed},
           {"threads", c.threads}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("experiment config must be a JSON object");
  static const std::set<std::string> keys{
      "scenario",  "alphabet",   "f0",         "f0_variance", "q_kind",  "offset",          "q_floor",
      "n",         "n_alpha",    "window",     "c_s_sweep",   "c_d_sweep", "fma_sweep",     "glrt_sweep",
      "rho",       "trials",     "fa_trials",  "post_change_samples", "f1_sampler", "f1_list", "change_times",
      "max_steps", "bench_sizes", "bench_steps", "seed",      "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
  }
  std::string scenario = "cht";
  read_optional(j, "scenario", scenario);
  ExperimentConfig c = defaults_for(scenario_from_string(scenario));

  if (j.contains("alphabet")) {
    read_optional(j, "alphabet", c.alphabet);
    c.f0.assign(c.alphabet.size(), 1.0 / static_cast<double>(c.alphabet.size()));
  }
  read_optional(j, "f0", c.f0);
  if (j.contains("f0_variance")) {
    if (j.contains("f0")) throw InvalidArgument("give either f0 or f0_variance, not both");
    double v = 0.0;
    read_optional(j, "f0_variance", v);
    const Pmf g = discrete_gaussian(c.alphabet_ptr(), v);
    c.f0.assign(g.probs().begin(), g.probs().end());
  }
  if (j.contains("q_kind")) c.q_kind = q_kind_from_string(j.at("q_kind").get<std::string>());
  read_optional(j, "offset", c.offset);
  read_optional(j, "q_floor", c.q_floor);
  read_optional(j, "n", c.n);
  read_optional(j, "n_alpha", c.n_alpha);
  read_optional(j, "window", c.window);
  read_optional(j, "c_s_sweep", c.c_s_sweep);
  read_optional(j, "c_d_sweep", c.c_d_sweep);
  read_optional(j, "fma_sweep", c.fma_sweep);
  read_optional(j, "glrt_sweep", c.glrt_sweep);
  read_optional(j, "rho", c.rho);
  read_optional(j, "trials", c.trials);
  if (j.contains("fa_trials") && !j.at("fa_trials").is_null()) {
    std::size_t t = 0;
    read_optional(j, "fa_trials", t);
    c.fa_trials = t;
  }
  read_optional(j, "post_change_samples", c.post_change_samples);
  if (j.contains("f1_sampler")) c.f1_sampler = f1_sampler_from_string(j.at("f1_sampler").get<std::string>());
  read_optional(j, "f1_list", c.f1_list);
  read_optional(j, "change_times", c.change_times);
  read_optional(j, "max_steps", c.max_steps);
  read_optional(j, "bench_sizes", c.bench_sizes);
  read_optional(j, "bench_steps", c.bench_steps);
  read_optional(j, "seed", c.seed);
  read_optional(j, "threads", c.threads);
  return c;
}

std::vector<double> probs_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("a pmf must be a JSON array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidArgument("a pmf must be a JSON array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<double> read_pmf_text(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw DataError("line " + std::to_string(line_no) + ": not a probability: '" + line + "'");
    }
  }
  return out;
}

}  // namespace ipt
