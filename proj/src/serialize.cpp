#include "discover/serialize.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>

namespace discover {

std::string_view to_string(Direction d) {
  return d == Direction::maximize ? "maximize" : "minimize";
}

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::timeout:
      return "timeout";
    case FailureReason::crash:
      return "crash";
    case FailureReason::protocol:
      return "protocol";
    case FailureReason::constraint:
      return "constraint";
  }
  return "crash";
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::budget:
      return "budget";
    case StopReason::target_reached:
      return "target_reached";
    case StopReason::aborted:
      return "aborted";
  }
  return "aborted";
}

Direction parse_direction(std::string_view s) {
  if (s == "maximize") return Direction::maximize;
  if (s == "minimize") return Direction::minimize;
  throw FormatError("unknown direction '" + std::string(s) + "'");
}

FailureReason parse_failure_reason(std::string_view s) {
  if (s == "timeout") return FailureReason::timeout;
  if (s == "crash") return FailureReason::crash;
  if (s == "protocol") return FailureReason::protocol;
  if (s == "constraint") return FailureReason::constraint;
  throw FormatError("unknown failure_reason '" + std::string(s) + "'");
}

StopReason parse_stop_reason(std::string_view s) {
  if (s == "budget") return StopReason::budget;
  if (s == "target_reached") return StopReason::target_reached;
  if (s == "aborted") return StopReason::aborted;
  throw FormatError("unknown stop_reason '" + std::string(s) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

std::string utc_timestamp() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::string logical_timestamp(std::uint64_t tick) {
  const std::time_t t = static_cast<std::time_t>(tick);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S.000Z", &tm);
  return buf;
}

Json to_json(const EvaluationResult& r) {
  Json j;
  j["valid"] = r.valid;
  if (std::isfinite(r.score)) {
    j["score"] = r.score;
  } else {
    j["score"] = nullptr;
  }
  j["direction"] = to_string(r.direction);
  j["metrics"] = Json::object();
  for (const auto& [name, value] : r.metrics) {
    if (std::isfinite(value)) {
      j["metrics"][name] = value;
    } else {
      j["metrics"][name] = nullptr;
    }
  }
  j["duration_s"] = r.duration_s;
  j["log_excerpt"] = r.log_excerpt;
  if (r.failure_reason) {
    j["failure_reason"] = to_string(*r.failure_reason);
  } else {
    j["failure_reason"] = nullptr;
  }
  return j;
}

namespace {

double number_or_nan(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

}  // namespace

EvaluationResult evaluation_result_from_json(const Json& j) {
  EvaluationResult r;
  r.valid = j.at("valid").get<bool>();
  r.score = number_or_nan(j.at("score"));
  r.direction = parse_direction(j.at("direction").get<std::string>());
  for (const auto& [name, value] : j.at("metrics").items()) {
    r.metrics[name] = number_or_nan(value);
  }
  r.duration_s = j.at("duration_s").get<double>();
  r.log_excerpt = j.at("log_excerpt").get<std::string>();
  if (const auto& f = j.at("failure_reason"); !f.is_null()) {
    r.failure_reason = parse_failure_reason(f.get<std::string>());
  }
  return r;
}

Json to_json_record(const Candidate& c) {
  Json j;
  j["id"] = c.id;
  j["parent_id"] = c.parent_id ? Json(*c.parent_id) : Json(nullptr);
  j["iteration"] = c.iteration;
  j["provider_id"] = c.provider_id;
  j["created_at"] = c.created_at;
  j["result"] = c.result ? to_json(*c.result) : Json(nullptr);
  return j;
}

Candidate candidate_from_record(const Json& j) {
  Candidate c;
  c.id = j.at("id").get<CandidateId>();
  if (const auto& p = j.at("parent_id"); !p.is_null()) {
    c.parent_id = p.get<CandidateId>();
  }
  c.iteration = j.at("iteration").get<std::uint64_t>();
  c.provider_id = j.at("provider_id").get<std::string>();
  c.created_at = j.at("created_at").get<std::string>();
  if (const auto& r = j.at("result"); !r.is_null()) {
    c.result = evaluation_result_from_json(r);
  }
  return c;
}

Json to_json(const RunReport& r) {
  Json j;
  j["best_candidate_id"] = r.best_candidate_id ? Json(*r.best_candidate_id) : Json(nullptr);
  j["direction"] = to_string(r.direction);
  j["best_score_trajectory"] = Json::array();
  for (const auto& p : r.best_score_trajectory) {
    Json row;
    row["iteration"] = p.iteration;
    row["best_score"] = p.best_score;
    row["best_id"] = p.best_id;
    row["attempts_cumulative"] = p.attempts_cumulative;
    j["best_score_trajectory"].push_back(std::move(row));
  }
  j["attempts"] = r.attempts;
  j["iterations_used"] = r.iterations_used;
  j["stop_reason"] = to_string(r.stop_reason);
  return j;
}

RunReport run_report_from_json(const Json& j) {
  RunReport r;
  if (const auto& b = j.at("best_candidate_id"); !b.is_null()) {
    r.best_candidate_id = b.get<CandidateId>();
  }
  r.direction = parse_direction(j.at("direction").get<std::string>());
  for (const auto& row : j.at("best_score_trajectory")) {
    TrajectoryPoint p;
    p.iteration = row.at("iteration").get<std::uint64_t>();
    p.best_score = row.at("best_score").get<double>();
    p.best_id = row.at("best_id").get<CandidateId>();
    p.attempts_cumulative = row.at("attempts_cumulative").get<std::uint64_t>();
    r.best_score_trajectory.push_back(p);
  }
  r.attempts = j.at("attempts").get<std::uint64_t>();
  r.iterations_used = j.at("iterations_used").get<std::uint64_t>();
  r.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
  return r;
}

}  // namespace discover
