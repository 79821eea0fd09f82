#pragma once

#include <string>

#include <json.hpp>

#include "discover/types.hpp"

namespace discover {

using Json = nlohmann::ordered_json;

Json to_json(const EvaluationResult& r);
EvaluationResult evaluation_result_from_json(const Json& j);

// Database record of a candidate. The program text is stored separately
// (programs/<id>.txt), so it is neither written nor read here.
Json to_json_record(const Candidate& c);
Candidate candidate_from_record(const Json& j);

Json to_json(const RunReport& r);
RunReport run_report_from_json(const Json& j);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Current UTC time as ISO-8601 with millisecond precision.
std::string utc_timestamp();

/// Deterministic stand-in for utc_timestamp() used by reproducible runs.
std::string logical_timestamp(std::uint64_t tick);

}  // namespace discover
