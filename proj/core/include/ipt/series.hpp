#pragma once

// Time-series front end: CSV ingestion, quantization onto a finite alphabet,
// and rolling-window RLLF analysis against a long-term or given f0.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipt/projection.hpp"
#include "ipt/simplex.hpp"

namespace ipt {

enum class MissingPolicy { kDrop, kError };

const char* to_string(MissingPolicy p) noexcept;
MissingPolicy missing_policy_from_string(const std::string& name);

struct SeriesSpec {
  std::string path;
  /// Header name, or a 0-based column index when no header matches.
  std::string column;
  std::optional<std::string> timestamp_column;
  MissingPolicy missing = MissingPolicy::kDrop;
};

struct Series {
  std::vector<double> values;
  /// Empty unless a timestamp column was requested.
  std::vector<std::string> timestamps;
  /// Data rows read (header excluded).
  std::size_t rows = 0;
  std::size_t dropped = 0;
};

/// Reads a header-first CSV with RFC 4180 quoting. Blank, unparseable and
/// non-finite cells count as missing.
Series ingest_csv(const SeriesSpec& spec);
Series parse_csv(std::istream& in, const SeriesSpec& spec);

enum class QuantizerMode { kUniform, kEdges, kQuantile };

const char* to_string(QuantizerMode m) noexcept;
QuantizerMode quantizer_mode_from_string(const std::string& name);

struct QuantizerSpec {
  QuantizerMode mode = QuantizerMode::kUniform;
  /// kUniform and kQuantile.
  std::size_t bins = 0;
  /// kUniform range.
  double lo = 0.0;
  double hi = 0.0;
  /// kEdges: bins + 1 strictly increasing edges.
  std::vector<double> edges;
  /// Representative letters; bin midpoints when empty.
  std::vector<double> letters;
};

struct Quantized {
  std::vector<double> symbols;
  std::vector<std::uint32_t> indices;
  AlphabetPtr alphabet;
  std::vector<double> edges;
  /// Values outside [edges.front(), edges.back()] moved to the end bins.
  std::size_t clamped = 0;
};

/// Bins are [e_i, e_{i+1}) except the last, which also holds e_m.
Quantized quantize(std::span<const double> series, const QuantizerSpec& spec);

/// Type-7 sample quantile (linear interpolation between order statistics).
double sample_quantile(std::vector<double> values, double p);

enum class Direction { kAbove, kBelow };

const char* to_string(Direction d) noexcept;
Direction direction_from_string(const std::string& name);

struct RllfConfig {
  std::size_t n = 25;
  /// Raw threshold on the window statistic, crossed in `direction`.
  double c_s = 0.0;
  double c_d = 0.0;
  Direction direction = Direction::kAbove;
  QKind q_kind = QKind::kMean;
  /// Reference pmf; the smoothed long-term empirical pmf when absent.
  std::optional<std::vector<double>> f0;
};

struct RllfRow {
  /// 1-based index of the window's last sample.
  std::size_t t = 0;
  /// Window statistic in the series' own units.
  double moving_avg = 0.0;
  bool s_crossed = false;
  std::optional<double> rllf;
  bool change = false;
};

struct RllfResult {
  Pmf f0;
  /// Most likely outlier over the original alphabet.
  Pmf f_star;
  double kl_f_star = 0.0;
  std::vector<RllfRow> rows;
};

/// Empirical pmf of the indices with zero cells set to 1/(2T), renormalized.
Pmf long_term_pmf(std::span<const std::uint32_t> indices, const AlphabetPtr& alphabet);

RllfResult rllf_analysis(std::span<const std::uint32_t> indices, const AlphabetPtr& alphabet,
                         const RllfConfig& config);

void write_rllf_csv(std::ostream& os, const std::vector<RllfRow>& rows);

enum class CalibrationSource {
  /// Windows drawn from f*, all crossing ones weighted equally.
  kFStar,
  /// Windows of f0 conditioned on crossing, via importance weights from f*.
  kF0Conditional,
};

struct CalibrationConfig {
  std::size_t n = 25;
  double c_s = 0.0;
  Direction direction = Direction::kAbove;
  QKind q_kind = QKind::kMean;
  double percentile = 0.95;
  std::size_t draws = 10000;
  CalibrationSource source = CalibrationSource::kFStar;
  std::uint64_t seed = 1;
};

/// c_d as the given percentile of the RLLF over c_s-crossing windows.
double calibrate_cd(const Pmf& f0, const CalibrationConfig& config);

}  // namespace ipt
