#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "subreg/convexity.hpp"
#include "subreg/geneq.hpp"

namespace subreg {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr const char* kCurveHeader = "shell,radius,min_ratio,max_ratio,cumulative_min";

/// Finite values as numbers; +-inf as the strings "inf" / "-inf"; NaN as null.
json number(double v);
/// Inverse of number().
double read_number(const json& j);
/// {"value": v, "evidence": tag}.
json tagged(double v, const std::string& evidence);

json to_json(const Vec& v);
json to_json(const SamplingSchedule& s);
json to_json(const RateEstimate& e);
json to_json(const Certificate& c);
json to_json(const BoundReport& r);
json to_json(const ConstantEstimate& c);
json to_json(const std::vector<SolutionSample>& samples);

/// One CSV row per shell under kCurveHeader.
std::string curve_csv(const RateEstimate& e);

/// FNV-1a 64-bit hash rendered as 16 hex digits.
std::string fnv1a64(std::string_view bytes);

/// Report without its "timings" member, dumped with a fixed indentation.
std::string canonical_dump(const json& report);

/// Checks the schema version and rejects unknown top-level or task fields.
void validate_report(const json& report);

}  // namespace subreg
