#include "ipt/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

#include "ipt/errors.hpp"
#include "ipt/random.hpp"
#include "ipt/window.hpp"

namespace ipt {

namespace {

using Record = std::vector<std::string>;

// Splits RFC 4180 text into records. Quoted fields may hold separators,
// doubled quotes and line breaks; CRLF and LF both end a record.
std::vector<Record> split_csv(const std::string& text) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    current.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(current.size() == 1 && current[0].empty())) records.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) throw DataError("stray quote inside an unquoted CSV field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += ch;
        field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (field_started || !current.empty()) end_record();
  return records;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t resolve_column(const Record& header, const std::string& column) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == column) return i;
  }
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(column.data(), column.data() + column.size(), index);
  if (ec == std::errc() && ptr == column.data() + column.size() && index < header.size()) return index;
  throw DataError("column '" + column + "' not found in CSV header");
}

// Letters of the mirrored alphabet -a_m < ... < -a_1, so a "below" test on
// the mean becomes an "above" test on the mirrored mean.
AlphabetPtr mirror(const Alphabet& alphabet) {
  std::vector<double> letters(alphabet.letters().rbegin(), alphabet.letters().rend());
  for (double& a : letters) a = -a;
  return Alphabet::make(std::move(letters));
}

std::vector<double> reversed(std::span<const double> v) { return {v.rbegin(), v.rend()}; }

// The analysis runs in "q >= c" form: letters, f0 and threshold are mirrored
// for the below direction.
struct Oriented {
  AlphabetPtr alphabet;
  Pmf f0;
  QFunction q;
  double c_s;
  bool flipped;
};

Oriented orient(const Pmf& f0, QKind kind, Direction direction, double c_s) {
  if (direction == Direction::kAbove) {
    const QFunction q = kind == QKind::kMean ? QFunction::mean(f0.alphabet_ptr()) : QFunction::variance(f0.alphabet_ptr());
    return {f0.alphabet_ptr(), f0, q, c_s, false};
  }
  if (kind != QKind::kMean) throw Unsupported("the below direction is only defined for the mean statistic");
  AlphabetPtr m = mirror(f0.alphabet());
  Pmf g(m, reversed(f0.probs()));
  return {m, std::move(g), QFunction::mean(m), -c_s, true};
}

std::vector<std::uint32_t> orient_indices(std::span<const std::uint32_t> indices, std::size_t m, bool flipped) {
  std::vector<std::uint32_t> out(indices.begin(), indices.end());
  if (flipped) {
    for (auto& i : out) i = static_cast<std::uint32_t>(m - 1 - i);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(MissingPolicy p) noexcept { return p == MissingPolicy::kError ? "error" : "drop"; }

MissingPolicy missing_policy_from_string(const std::string& name) {
  if (name == "drop") return MissingPolicy::kDrop;
  if (name == "error") return MissingPolicy::kError;
  throw InvalidArgument("unknown missing-value policy '" + name + "'");
}

Series parse_csv(std::istream& in, const SeriesSpec& spec) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto records = split_csv(text);
  if (records.empty()) throw DataError("CSV has no header row");
  const std::size_t col = resolve_column(records[0], spec.column);
  std::optional<std::size_t> ts_col;
  if (spec.timestamp_column) ts_col = resolve_column(records[0], *spec.timestamp_column);

  Series out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    ++out.rows;
    const std::optional<double> v = col < rec.size() ? parse_number(rec[col]) : std::nullopt;
    if (!v) {
      if (spec.missing == MissingPolicy::kError) {
        const std::string cell = col < rec.size() ? rec[col] : "";
        throw DataError("row " + std::to_string(r) + ": missing or unparseable value '" + cell + "' in column '" +
                        spec.column + "'");
      }
      ++out.dropped;
      continue;
    }
    out.values.push_back(*v);
    if (ts_col) out.timestamps.push_back(*ts_col < rec.size() ? trim(rec[*ts_col]) : "");
  }
  return out;
}

Series ingest_csv(const SeriesSpec& spec) {
  std::ifstream in(spec.path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + spec.path + "'");
  return parse_csv(in, spec);
}

const char* to_string(QuantizerMode m) noexcept {
  switch (m) {
    case QuantizerMode::kUniform: return "uniform";
    case QuantizerMode::kEdges: return "edges";
    case QuantizerMode::kQuantile: return "quantile";
  }
  return "unknown";
}

QuantizerMode quantizer_mode_from_string(const std::string& name) {
  if (name == "uniform") return QuantizerMode::kUniform;
  if (name == "edges") return QuantizerMode::kEdges;
  if (name == "quantile") return QuantizerMode::kQuantile;
  throw InvalidArgument("unknown quantizer mode '" + name + "'");
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Quantized quantize(std::span<const double> series, const QuantizerSpec& spec) {
  Quantized out;
  switch (spec.mode) {
    case QuantizerMode::kUniform: {
      if (spec.bins < 2) throw InvalidArgument("uniform quantizer needs at least 2 bins");
      if (!(spec.lo < spec.hi)) throw InvalidArgument("uniform quantizer needs lo < hi");
      const double width = (spec.hi - spec.lo) / static_cast<double>(spec.bins);
      for (std::size_t j = 0; j < spec.bins; ++j) out.edges.push_back(spec.lo + width * static_cast<double>(j));
      out.edges.push_back(spec.hi);
      break;
    }
    case QuantizerMode::kEdges:
      if (spec.edges.size() < 3) throw InvalidArgument("explicit quantizer needs at least 3 edges");
      out.edges = spec.edges;
      break;
    case QuantizerMode::kQuantile: {
      if (spec.bins < 2) throw InvalidArgument("quantile quantizer needs at least 2 bins");
      std::vector<double> sorted(series.begin(), series.end());
      std::sort(sorted.begin(), sorted.end());
      const auto distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
      if (distinct < spec.bins) {
        throw DataError("quantile quantizer: " + std::to_string(distinct) + " distinct values for " +
                        std::to_string(spec.bins) + " bins");
      }
      const std::vector<double> all(series.begin(), series.end());
      for (std::size_t j = 0; j <= spec.bins; ++j) {
        out.edges.push_back(sample_quantile(all, static_cast<double>(j) / static_cast<double>(spec.bins)));
      }
      break;
    }
  }
  for (std::size_t j = 1; j < out.edges.size(); ++j) {
    if (!(out.edges[j - 1] < out.edges[j])) {
      if (spec.mode == QuantizerMode::kQuantile) throw DataError("quantile edges collapse; too many tied values");
      throw InvalidArgument("quantizer edges must be strictly increasing");
    }
  }
  const std::size_t bins = out.edges.size() - 1;
  std::vector<double> letters = spec.letters;
  if (letters.empty()) {
    for (std::size_t j = 0; j < bins; ++j) letters.push_back((out.edges[j] + out.edges[j + 1]) / 2.0);
  } else if (letters.size() != bins) {
    throw InvalidArgument("need one representative letter per bin");
  }
  out.alphabet = Alphabet::make(letters);

  out.symbols.reserve(series.size());
  out.indices.reserve(series.size());
  for (double v : series) {
    if (!std::isfinite(v)) throw DataError("cannot quantize a non-finite value");
    std::size_t bin;
    if (v < out.edges.front()) {
      bin = 0;
      ++out.clamped;
    } else if (v > out.edges.back()) {
      bin = bins - 1;
      ++out.clamped;
    } else {
      const auto it = std::upper_bound(out.edges.begin() + 1, out.edges.end() - 1, v);
      bin = static_cast<std::size_t>(it - (out.edges.begin() + 1));
    }
    out.indices.push_back(static_cast<std::uint32_t>(bin));
    out.symbols.push_back((*out.alphabet)[bin]);
  }
  return out;
}

const char* to_string(Direction d) noexcept { return d == Direction::kBelow ? "below" : "above"; }

Direction direction_from_string(const std::string& name) {
  if (name == "above") return Direction::kAbove;
  if (name == "below") return Direction::kBelow;
  throw InvalidArgument("unknown direction '" + name + "'");
}

Pmf long_term_pmf(std::span<const std::uint32_t> indices, const AlphabetPtr& alphabet) {
  if (indices.empty()) throw InvalidArgument("long-term pmf needs a non-empty series");
  std::vector<double> counts(alphabet->size(), 0.0);
  for (auto i : indices) {
    if (i >= counts.size()) throw DataError("letter index outside the alphabet");
    counts[i] += 1.0;
  }
  const double t = static_cast<double>(indices.size());
  for (double& c : counts) c = c > 0.0 ? c / t : 1.0 / (2.0 * t);
  return Pmf::from_weights(alphabet, std::move(counts));
}

RllfResult rllf_analysis(std::span<const std::uint32_t> indices, const AlphabetPtr& alphabet,
                         const RllfConfig& config) {
  if (config.n == 0) throw InvalidArgument("window must hold at least one sample");
  if (indices.size() < config.n) throw InvalidArgument("window is longer than the series");
  if (!(config.c_d >= 0.0)) throw InvalidArgument("c_d must be non-negative");
  const Pmf f0 = config.f0 ? Pmf(alphabet, *config.f0) : long_term_pmf(indices, alphabet);
  const Oriented o = orient(f0, config.q_kind, config.direction, config.c_s);
  const ProjectionResult proj = i_project(o.f0, o.q, o.c_s);
  const auto stream = orient_indices(indices, alphabet->size(), o.flipped);

  RllfResult out{f0, o.flipped ? Pmf(alphabet, reversed(proj.f_star.probs())) : proj.f_star, proj.kl_value, {}};
  SlidingWindow window(o.q, config.n);
  window.set_reference(proj.f_star.probs());
  out.rows.reserve(stream.size() - config.n + 1);
  for (std::size_t k = 1; k <= stream.size(); ++k) {
    window.push(stream[k - 1]);
    if (k < config.n) continue;
    RllfRow row;
    row.t = k;
    const double s = window.q_raw();
    row.moving_avg = o.flipped ? -s : s;
    row.s_crossed = s >= o.c_s;
    if (row.s_crossed) {
      row.rllf = window.kl_to_reference();
      row.change = *row.rllf >= config.c_d;
    }
    out.rows.push_back(row);
  }
  return out;
}

void write_rllf_csv(std::ostream& os, const std::vector<RllfRow>& rows) {
  os << "t,moving_avg,s_crossed,rllf,change\n";
  for (const auto& r : rows) {
    os << r.t << ',' << format_double(r.moving_avg) << ',' << (r.s_crossed ? 1 : 0) << ','
       << (r.rllf ? format_double(*r.rllf) : "") << ',' << (r.change ? 1 : 0) << '\n';
  }
}

double calibrate_cd(const Pmf& f0, const CalibrationConfig& config) {
  if (config.n == 0 || config.draws == 0) throw InvalidArgument("calibration needs n >= 1 and draws >= 1");
  if (!(config.percentile >= 0.0 && config.percentile <= 1.0)) {
    throw InvalidArgument("percentile must lie in [0, 1]");
  }
  const Oriented o = orient(f0, config.q_kind, config.direction, config.c_s);
  const ProjectionResult proj = i_project(o.f0, o.q, o.c_s);
  const auto fs = proj.f_star.probs();
  const auto g = o.f0.probs();
  const AliasSampler sampler(fs);
  Engine rng(derive_seed(config.seed, {0xca1b}));

  SlidingWindow window(o.q, config.n);
  window.set_reference(fs);
  std::vector<std::pair<double, double>> samples;  // (rllf, log weight)
  for (std::size_t d = 0; d < config.draws; ++d) {
    window.clear();
    for (std::size_t i = 0; i < config.n; ++i) window.push(sampler(rng));
    if (window.q_raw() < o.c_s) continue;
    double log_w = 0.0;
    if (config.source == CalibrationSource::kF0Conditional) {
      const auto counts = window.counts();
      for (std::size_t a = 0; a < counts.size(); ++a) {
        if (counts[a]) log_w += counts[a] * (std::log(g[a]) - std::log(fs[a]));
      }
    }
    samples.emplace_back(window.kl_to_reference(), log_w);
  }
  if (samples.empty()) throw InvalidArgument("no calibration window crossed c_s");
  std::sort(samples.begin(), samples.end());
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) top = std::max(top, s.second);
  double total = 0.0;
  for (const auto& s : samples) total += std::exp(s.second - top);
  double cum = 0.0;
  for (const auto& s : samples) {
    cum += std::exp(s.second - top) / total;
    if (cum >= config.percentile - 1e-12) return s.first;
  }
  return samples.back().first;
}

}  // namespace ipt
