#pragma once

// JSON encodings of configurations and results (nlohmann::json ADL hooks)
// plus the plain-text pmf format: one probability per line.

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipt/bounds.hpp"
#include "ipt/detectors.hpp"
#include "ipt/errors.hpp"
#include "ipt/evaluation.hpp"
#include "ipt/projection.hpp"
#include "ipt/series.hpp"
#include "ipt/simplex.hpp"

namespace ipt {

using json = nlohmann::json;

QKind q_kind_from_string(const std::string& name);

void to_json(json& j, const Pmf& f);
void to_json(json& j, const ProjectionResult& r);
void to_json(json& j, const TraceRow& r);
void to_json(json& j, const AlarmReport& r);
void to_json(json& j, const BoundInputs& b);
void from_json(const json& j, BoundInputs& b);
void to_json(json& j, const BoundValue& v);
void to_json(json& j, const TcdBounds& b);
void to_json(json& j, const ArlBound& b);
void to_json(json& j, const CurvePoint& p);
void to_json(json& j, const TimingRow& r);
void to_json(json& j, const RllfRow& r);
void to_json(json& j, const ExperimentConfig& c);

/// Reads an experiment config on top of the scenario's defaults. Unknown keys
/// are rejected. An alphabet without an f0 implies a uniform f0;
/// "f0_variance" asks for a discrete Gaussian instead.
ExperimentConfig experiment_config_from_json(const json& j);

/// A pmf given as a JSON array of probabilities.
std::vector<double> probs_from_json(const json& j);
/// One probability per non-blank line.
std::vector<double> read_pmf_text(std::istream& in);

/// Reads `key` from `j` into `out` when present, with a message naming the
/// key on type errors.
template <typename T>
void read_optional(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace ipt
