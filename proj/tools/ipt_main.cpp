// ipt: command-line front end for projections, detectors, bounds, Monte Carlo
// experiments, timing and time-series analysis.
//
// Exit codes: 0 success, 1 usage or infeasible configuration, 2 data error,
// 3 numerical non-convergence.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipt/bounds.hpp"
#include "ipt/detectors.hpp"
#include "ipt/errors.hpp"
#include "ipt/evaluation.hpp"
#include "ipt/json.hpp"
#include "ipt/projection.hpp"
#include "ipt/series.hpp"
#include "ipt/window.hpp"

namespace {

using ipt::json;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv";
  std::optional<unsigned> threads;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json load_config(const Globals& g) {
  if (g.config_path.empty()) return json::object();
  std::ifstream in(g.config_path);
  if (!in) throw ipt::InvalidArgument("cannot open config '" + g.config_path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ipt::InvalidArgument("config '" + g.config_path + "': " + e.what());
  }
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ipt::InvalidArgument("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      throw ipt::InvalidArgument("not a number list: '" + text + "'");
    }
  }
  return out;
}

// A pmf given inline as "0.2,0.3,0.5", or as a file holding a JSON array or
// one probability per line.
std::vector<double> pmf_argument(const std::string& value) {
  if (value.empty()) return {};
  std::ifstream in(value);
  if (!in) return parse_list(value);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') return ipt::probs_from_json(json::parse(text));
  std::istringstream lines(text);
  return ipt::read_pmf_text(lines);
}

std::vector<double> read_stream(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (!path.empty() && path != "-") {
    file.open(path);
    if (!file) throw ipt::DataError("cannot open '" + path + "'");
    in = &file;
  }
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ipt::DataError("stream line " + std::to_string(line_no) + ": not a letter: '" + line + "'");
    }
  }
  return out;
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  ipt::read_optional(j, key, fallback);
  return fallback;
}

// Alphabet, f0 and q shared by project and detect.
struct Model {
  ipt::AlphabetPtr alphabet;
  ipt::Pmf f0;
  ipt::QFunction q;
};

Model model_from(const json& j) {
  const auto letters = value_or<std::vector<double>>(j, "alphabet", {-1.0, 0.0, 1.0});
  auto alphabet = ipt::Alphabet::make(letters);
  ipt::Pmf f0 = j.contains("f0") ? ipt::Pmf(alphabet, ipt::probs_from_json(j.at("f0"))) : ipt::Pmf::uniform(alphabet);
  const auto kind = ipt::q_kind_from_string(value_or<std::string>(j, "q_kind", "mean"));
  const double offset = value_or(j, "offset", 0.0);
  std::optional<ipt::QFunction> q;
  switch (kind) {
    case ipt::QKind::kMean: q = ipt::QFunction::mean(alphabet, offset); break;
    case ipt::QKind::kVariance: q = ipt::QFunction::variance(alphabet, offset); break;
    case ipt::QKind::kLogLikelihoodRatio:
      if (!j.contains("f1")) throw ipt::InvalidArgument("the llr q kind needs f1");
      q = ipt::QFunction::log_likelihood_ratio(f0, ipt::Pmf(alphabet, ipt::probs_from_json(j.at("f1"))));
      break;
  }
  if (j.contains("lipschitz")) q = q->with_lipschitz(j.at("lipschitz").get<double>());
  return {alphabet, std::move(f0), std::move(*q)};
}

// Command-line values override config keys of the same name.
struct ModelFlags {
  std::string alphabet, f0, f1, q_kind;
  std::optional<double> offset;

  void add(CLI::App* cmd) {
    cmd->add_option("--alphabet", alphabet, "Comma-separated letters");
    cmd->add_option("--f0", f0, "Pre-change pmf: comma list or file");
    cmd->add_option("--f1", f1, "Representative post-change pmf for the llr kind");
    cmd->add_option("--q", q_kind, "Statistic: mean, variance or llr");
    cmd->add_option("--offset", offset, "Centering offset of q");
  }
  void apply(json& j) const {
    if (!alphabet.empty()) j["alphabet"] = parse_list(alphabet);
    if (!f0.empty()) j["f0"] = pmf_argument(f0);
    if (!f1.empty()) j["f1"] = pmf_argument(f1);
    if (!q_kind.empty()) j["q_kind"] = q_kind;
    if (offset) j["offset"] = *offset;
  }
};

template <typename T>
void set_if(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

// ---------------------------------------------------------------------------

struct ProjectArgs {
  ModelFlags model;
  std::optional<double> c;
  std::string f_hat;
  bool reverse = false;
};

int run_project(const Globals& g, const ProjectArgs& a) {
  json j = load_config(g);
  a.model.apply(j);
  set_if(j, "c", a.c);
  if (!a.f_hat.empty()) j["f_hat"] = pmf_argument(a.f_hat);
  if (a.reverse) j["direction"] = "reverse";
  const Model m = model_from(j);
  if (!j.contains("c")) throw ipt::InvalidArgument("project needs a threshold c (raw units)");
  const double c = j.at("c").get<double>() - m.q.offset();
  const bool reverse = value_or<std::string>(j, "direction", "forward") == "reverse";
  if (reverse && !j.contains("f_hat")) throw ipt::InvalidArgument("reverse projection needs f_hat");
  const ipt::ProjectionResult r = reverse
      ? ipt::reverse_project(ipt::Pmf(m.alphabet, ipt::probs_from_json(j.at("f_hat"))), m.q, c)
      : ipt::i_project(m.f0, m.q, c);
  Output out(g.out_path);
  if (g.format == "json") {
    out.stream() << json(r).dump(2) << '\n';
  } else {
    out.stream() << "letter,f_star\n";
    for (std::size_t i = 0; i < r.f_star.size(); ++i) {
      out.stream() << fmt(m.alphabet->letters()[i]) << ',' << fmt(r.f_star[i]) << '\n';
    }
    out.stream() << "# kl_value," << fmt(r.kl_value) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
  ModelFlags model;
  std::string input;
  std::optional<std::size_t> n, stride, max_lookback;
  std::optional<double> c_s, c_d, rho, q_floor, threshold;
  bool trace = false;
};

void write_report(const Globals& g, const ipt::AlarmReport& report) {
  Output out(g.out_path);
  if (g.format == "json") {
    out.stream() << json(report).dump(2) << '\n';
    return;
  }
  out.stream() << "k,S,D,n_k\n";
  for (const auto& row : report.trace) {
    out.stream() << row.k << ',' << fmt(row.s) << ',' << (row.d ? fmt(*row.d) : "") << ',' << row.n_k << '\n';
  }
  out.stream() << "# alarm_time," << (report.alarm_time ? std::to_string(*report.alarm_time) : "") << '\n';
  out.stream() << "# decision," << ipt::to_string(report.decision) << '\n';
  out.stream() << "# restarts," << report.restarts.size() << '\n';
}

int run_detect(const Globals& g, const DetectArgs& a, const std::string& which) {
  json j = load_config(g);
  a.model.apply(j);
  set_if(j, "n", a.n);
  set_if(j, "stride", a.stride);
  set_if(j, "max_lookback", a.max_lookback);
  set_if(j, "c_s", a.c_s);
  set_if(j, "c_d", a.c_d);
  set_if(j, "rho", a.rho);
  set_if(j, "q_floor", a.q_floor);
  set_if(j, "threshold", a.threshold);
  if (a.trace) j["trace"] = true;
  const Model m = model_from(j);
  const bool trace = value_or(j, "trace", false);
  const auto stream = read_stream(a.input);
  const auto n = value_or<std::size_t>(j, "n", 25);

  ipt::AlarmReport report;
  if (which == "fixed") {
    ipt::FixedIptConfig c{m.f0, m.q, n, 1, value_or(j, "c_s", 0.0), value_or(j, "c_d", 0.0), trace};
    if (j.contains("stride") && j.at("stride").is_string()) {
      if (j.at("stride").get<std::string>() != "corollary") throw ipt::InvalidArgument("stride must be a number or 'corollary'");
      c.stride = ipt::corollary_stride(n);
    } else {
      c.stride = value_or<std::size_t>(j, "stride", 1);
    }
    report = ipt::fixed_ipt_run(c, stream);
  } else if (which == "quickest") {
    ipt::QuickestIptConfig c{m.f0, m.q, value_or(j, "c_s", 10.0), value_or(j, "c_d", 0.0), value_or(j, "rho", 1.0),
                             value_or(j, "q_floor", 0.0), std::nullopt, trace};
    if (j.contains("max_lookback")) c.max_lookback = j.at("max_lookback").get<std::size_t>();
    report = ipt::quickest_ipt_run(c, stream);
  } else if (which == "fma") {
    report = ipt::fma_run(n, value_or(j, "threshold", 0.0), m.q, stream, trace);
  } else {
    report = ipt::glrt_run(n, value_or(j, "threshold", 0.0), m.q, value_or(j, "q_floor", 0.0), m.f0, stream, trace);
  }
  write_report(g, report);
  return kOk;
}

// ---------------------------------------------------------------------------

int run_simulate(const Globals& g, const std::string& scenario) {
  json j = load_config(g);
  if (j.contains("scenario") && j.at("scenario") != scenario) {
    throw ipt::InvalidArgument("config scenario '" + j.at("scenario").get<std::string>() + "' does not match '" +
                               scenario + "'");
  }
  j["scenario"] = scenario;
  ipt::ExperimentConfig c = ipt::experiment_config_from_json(j);
  if (g.seed) c.seed = *g.seed;
  if (g.threads) c.threads = *g.threads;
  const auto curve = ipt::simulate(c);
  Output out(g.out_path);
  if (g.format == "json") {
    out.stream() << json(curve).dump(2) << '\n';
  } else {
    ipt::write_curve_csv(out.stream(), curve);
  }
  return kOk;
}

int run_bench(const Globals& g) {
  json j = load_config(g);
  j["scenario"] = "bench";
  ipt::ExperimentConfig c = ipt::experiment_config_from_json(j);
  if (g.seed) c.seed = *g.seed;
  const auto rows = ipt::bench_step_time(c);
  Output out(g.out_path);
  if (g.format == "json") {
    out.stream() << json(rows).dump(2) << '\n';
  } else {
    ipt::write_timing_csv(out.stream(), rows);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct BoundRow {
  std::string name;
  double raw = std::nan("");
  double clamped = std::nan("");
  bool ok = false;
  std::string note;
};

template <typename F>
BoundRow guarded(const std::string& name, F&& f) {
  BoundRow row;
  row.name = name;
  try {
    f(row);
    row.ok = true;
  } catch (const ipt::InvalidArgument& e) {
    row.note = e.what();
  } catch (const ipt::Unsupported& e) {
    row.note = e.what();
  }
  return row;
}

int run_bounds(const Globals& g) {
  json j = load_config(g);
  ipt::BoundInputs b;
  std::optional<double> v_star;
  // A Mean-kind f0 fills in m, q0, L and v*; explicit keys still win.
  if (j.contains("f0")) {
    const Model m = model_from(j);
    b.m = m.alphabet->size();
    b.q0 = m.q(m.f0);
    b.lipschitz = m.q.lipschitz();
    if (m.q.kind() == ipt::QKind::kMean && b.q0 < 0.0) v_star = ipt::wald_root(m.f0, m.q);
  }
  if (j.contains("v_star")) v_star = j.at("v_star").get<double>();
  json inputs = j;
  for (const char* key : {"alphabet", "f0", "f1", "q_kind", "offset", "v_star"}) inputs.erase(key);
  ipt::from_json(inputs, b);

  std::vector<BoundRow> rows;
  rows.push_back(guarded("fa_bound", [&](BoundRow& r) {
    const auto v = ipt::fa_bound(b);
    r.raw = v.raw;
    r.clamped = v.clamped;
  }));
  rows.push_back(guarded("md_bound", [&](BoundRow& r) {
    const auto v = ipt::md_bound(b);
    r.raw = v.raw;
    r.clamped = v.clamped;
  }));
  ipt::TcdBounds tcd;
  rows.push_back(guarded("tcd_fa_window", [&](BoundRow& r) {
    tcd = ipt::tcd_bounds(b);
    r.raw = tcd.fa_window.raw;
    r.clamped = tcd.fa_window.clamped;
    if (tcd.vacuous) r.note = "vacuous";
  }));
  rows.push_back(guarded("tcd_md", [&](BoundRow& r) {
    tcd = ipt::tcd_bounds(b);
    r.raw = tcd.md.raw;
    r.clamped = tcd.md.clamped;
    if (tcd.vacuous) r.note = "vacuous";
  }));
  rows.push_back(guarded("arl_bound", [&](BoundRow& r) {
    if (!v_star) throw ipt::InvalidArgument("needs v_star or a Mean-kind f0 with q0 < 0");
    const auto v = ipt::arl_bound(b, *v_star);
    r.raw = v.value;
    r.clamped = v.value;
    if (v.warning) r.note = "|q0| < (1+rho) q_floor";
  }));
  rows.push_back(guarded("arl_asymptote", [&](BoundRow& r) {
    if (!v_star) throw ipt::InvalidArgument("needs v_star or a Mean-kind f0 with q0 < 0");
    const auto v = ipt::arl_bound(b, *v_star);
    r.raw = v.asymptote;
    r.clamped = v.asymptote;
  }));
  rows.push_back(guarded("wadd_bound", [&](BoundRow& r) {
    r.raw = ipt::wadd_bound(b.c_s, b.q_floor);
    r.clamped = r.raw;
  }));
  rows.push_back(guarded("lorden_wadd", [&](BoundRow& r) {
    if (!v_star) throw ipt::InvalidArgument("needs v_star or a Mean-kind f0 with q0 < 0");
    r.raw = ipt::lorden_wadd(b.gamma, *v_star, b.q_floor, b.q0, b.lipschitz);
    r.clamped = r.raw;
  }));

  Output out(g.out_path);
  if (g.format == "json") {
    json report{{"inputs", b}, {"v_star", v_star ? json(*v_star) : json(nullptr)}};
    for (const auto& r : rows) {
      report["bounds"][r.name] = {{"raw", r.ok ? json(r.raw) : json(nullptr)},
                                  {"clamped", r.ok ? json(r.clamped) : json(nullptr)},
                                  {"preconditions_ok", r.ok},
                                  {"note", r.note}};
    }
    if (tcd.epochs > 0) report["tcd"] = {{"nu", tcd.nu}, {"eta", tcd.eta}, {"epochs", tcd.epochs}};
    out.stream() << report.dump(2) << '\n';
  } else {
    out.stream() << "bound,raw,clamped,preconditions_ok,note\n";
    for (const auto& r : rows) {
      std::string note = r.note;
      for (char& ch : note) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      out.stream() << r.name << ',' << (r.ok ? fmt(r.raw) : "") << ',' << (r.ok ? fmt(r.clamped) : "") << ','
                   << (r.ok ? "true" : "false") << ',' << note << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string input, column, timestamp, missing, quantizer, edges, letters, direction, f0;
  std::optional<std::size_t> bins, n;
  std::optional<double> lo, hi, c_s, c_d, calibrate;
};

int run_analyze(const Globals& g, const AnalyzeArgs& a) {
  json j = load_config(g);
  auto set_str = [&](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  set_str("input", a.input);
  set_str("column", a.column);
  set_str("timestamp", a.timestamp);
  set_str("missing", a.missing);
  set_str("quantizer", a.quantizer);
  set_str("direction", a.direction);
  if (!a.edges.empty()) j["edges"] = parse_list(a.edges);
  if (!a.letters.empty()) j["letters"] = parse_list(a.letters);
  if (!a.f0.empty()) j["f0"] = pmf_argument(a.f0);
  set_if(j, "bins", a.bins);
  set_if(j, "n", a.n);
  set_if(j, "lo", a.lo);
  set_if(j, "hi", a.hi);
  set_if(j, "c_s", a.c_s);
  set_if(j, "c_d", a.c_d);
  set_if(j, "calibrate", a.calibrate);

  ipt::SeriesSpec spec;
  spec.path = value_or<std::string>(j, "input", "");
  if (spec.path.empty()) throw ipt::InvalidArgument("analyze needs --input");
  spec.column = value_or<std::string>(j, "column", "1");
  if (j.contains("timestamp")) spec.timestamp_column = j.at("timestamp").get<std::string>();
  spec.missing = ipt::missing_policy_from_string(value_or<std::string>(j, "missing", "drop"));
  const ipt::Series series = ipt::ingest_csv(spec);

  ipt::QuantizerSpec qs;
  qs.mode = ipt::quantizer_mode_from_string(value_or<std::string>(j, "quantizer", j.contains("edges") ? "edges" : "uniform"));
  qs.bins = value_or<std::size_t>(j, "bins", 0);
  qs.lo = value_or(j, "lo", 0.0);
  qs.hi = value_or(j, "hi", 0.0);
  qs.edges = value_or<std::vector<double>>(j, "edges", {});
  qs.letters = value_or<std::vector<double>>(j, "letters", {});
  const ipt::Quantized qz = ipt::quantize(series.values, qs);

  ipt::RllfConfig rc;
  rc.n = value_or<std::size_t>(j, "n", 25);
  if (!j.contains("c_s")) throw ipt::InvalidArgument("analyze needs c_s");
  rc.c_s = j.at("c_s").get<double>();
  rc.direction = ipt::direction_from_string(value_or<std::string>(j, "direction", "above"));
  if (j.contains("f0")) rc.f0 = ipt::probs_from_json(j.at("f0"));
  std::optional<double> calibrated;
  if (j.contains("calibrate")) {
    const ipt::Pmf f0 = rc.f0 ? ipt::Pmf(qz.alphabet, *rc.f0) : ipt::long_term_pmf(qz.indices, qz.alphabet);
    ipt::CalibrationConfig cc;
    cc.n = rc.n;
    cc.c_s = rc.c_s;
    cc.direction = rc.direction;
    cc.percentile = j.at("calibrate").get<double>();
    cc.draws = value_or<std::size_t>(j, "calibration_draws", 10000);
    cc.seed = g.seed.value_or(value_or<std::uint64_t>(j, "seed", 1));
    calibrated = ipt::calibrate_cd(f0, cc);
    rc.c_d = *calibrated;
  } else {
    rc.c_d = value_or(j, "c_d", 0.0);
  }
  const ipt::RllfResult result = ipt::rllf_analysis(qz.indices, qz.alphabet, rc);

  Output out(g.out_path);
  if (g.format == "json") {
    json report{{"rows_read", series.rows},
                {"rows_dropped", series.dropped},
                {"clamped", qz.clamped},
                {"edges", qz.edges},
                {"f0", result.f0},
                {"f_star", result.f_star},
                {"kl_f_star", result.kl_f_star},
                {"c_d", rc.c_d},
                {"calibrated", calibrated.has_value()},
                {"rows", result.rows}};
    out.stream() << report.dump(2) << '\n';
  } else {
    ipt::write_rllf_csv(out.stream(), result.rows);
  }
  std::cerr << "rows " << series.rows << ", dropped " << series.dropped << ", clamped " << qz.clamped << ", c_d "
            << fmt(rc.c_d) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information projection change detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--out", g.out_path, "Output file (stdout when omitted)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", g.threads, "Worker threads for simulate (0 = all cores)");

  ProjectArgs pa;
  auto* project = app.add_subcommand("project", "I-projection of f0, or reverse projection of f_hat");
  pa.model.add(project);
  project->add_option("--c", pa.c, "Threshold in raw q units");
  project->add_option("--f-hat", pa.f_hat, "Empirical pmf for --reverse");
  project->add_flag("--reverse", pa.reverse, "Reverse projection of f_hat");

  DetectArgs da;
  auto* detect = app.add_subcommand("detect", "Run a detector over a letter stream");
  detect->require_subcommand(1);
  std::string detector;
  for (const char* name : {"fixed", "quickest", "fma", "glrt"}) {
    auto* sub = detect->add_subcommand(name);
    sub->callback([&detector, name] { detector = name; });
  }
  da.model.add(detect);
  detect->add_option("--input", da.input, "Newline-delimited letters (stdin when omitted)");
  detect->add_option("--n", da.n, "Window size");
  detect->add_option("--stride", da.stride, "Fixed-window stride");
  detect->add_option("--c-s", da.c_s, "First threshold");
  detect->add_option("--c-d", da.c_d, "Second threshold (nats)");
  detect->add_option("--rho", da.rho, "Schedule parameter");
  detect->add_option("--q-floor", da.q_floor, "Post-change floor of q (raw)");
  detect->add_option("--threshold", da.threshold, "FMA / GLRT threshold");
  detect->add_option("--max-lookback", da.max_lookback, "Effective window cap for general q");
  detect->add_flag("--trace", da.trace, "Record per-step statistics");
  detect->fallthrough();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
  simulate->require_subcommand(1);
  std::string scenario;
  for (const char* name : {"cht", "tcd", "qcd"}) {
    simulate->add_subcommand(name)->callback([&scenario, name] { scenario = name; });
  }
  simulate->fallthrough();

  auto* bounds = app.add_subcommand("bounds", "Evaluate the closed-form bounds");
  auto* bench = app.add_subcommand("bench", "Per-step detector timing");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "RLLF analysis of a CSV time series");
  analyze->add_option("--input", aa.input, "CSV file with a header row");
  analyze->add_option("--column", aa.column, "Value column (name or 0-based index)");
  analyze->add_option("--timestamp", aa.timestamp, "Timestamp column");
  analyze->add_option("--missing", aa.missing, "drop or error");
  analyze->add_option("--quantizer", aa.quantizer, "uniform, edges or quantile");
  analyze->add_option("--bins", aa.bins, "Number of bins");
  analyze->add_option("--lo", aa.lo, "Uniform range start");
  analyze->add_option("--hi", aa.hi, "Uniform range end");
  analyze->add_option("--edges", aa.edges, "Explicit bin edges");
  analyze->add_option("--letters", aa.letters, "Representative letters per bin");
  analyze->add_option("--n", aa.n, "Window size");
  analyze->add_option("--c-s", aa.c_s, "Threshold on the moving average");
  analyze->add_option("--c-d", aa.c_d, "RLLF threshold (nats)");
  analyze->add_option("--direction", aa.direction, "above or below");
  analyze->add_option("--f0", aa.f0, "Explicit f0 instead of the long-term pmf");
  analyze->add_option("--calibrate", aa.calibrate, "Set c_d to this percentile of f*-window RLLF");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (project->parsed()) return run_project(g, pa);
    if (detect->parsed()) return run_detect(g, da, detector);
    if (simulate->parsed()) return run_simulate(g, scenario);
    if (bounds->parsed()) return run_bounds(g);
    if (bench->parsed()) return run_bench(g);
    if (analyze->parsed()) return run_analyze(g, aa);
  } catch (const ipt::DataError& e) {
    std::cerr << "ipt: data error: " << e.what() << '\n';
    return kData;
  } catch (const ipt::ConvergenceError& e) {
    std::cerr << "ipt: no convergence: " << e.what() << '\n';
    return kNumeric;
  } catch (const json::exception& e) {
    std::cerr << "ipt: config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "ipt: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
