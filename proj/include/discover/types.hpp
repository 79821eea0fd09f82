#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace discover {

using CandidateId = std::uint64_t;

enum class Direction { maximize, minimize };

enum class FailureReason { timeout, crash, protocol, constraint };

enum class StopReason { budget, target_reached, aborted };

std::string_view to_string(Direction d);
std::string_view to_string(FailureReason r);
std::string_view to_string(StopReason r);

Direction parse_direction(std::string_view s);
FailureReason parse_failure_reason(std::string_view s);
StopReason parse_stop_reason(std::string_view s);

/// True when `a` is strictly better than `b` under `d`.
inline bool better(double a, double b, Direction d) {
  return d == Direction::maximize ? a > b : a < b;
}

/// At least as good: used for threshold/target checks.
inline bool meets(double score, double threshold, Direction d) {
  return d == Direction::maximize ? score >= threshold : score <= threshold;
}

struct EvaluationResult {
  bool valid = false;
  double score = 0.0;
  Direction direction = Direction::maximize;
  std::map<std::string, double> metrics;
  double duration_s = 0.0;
  std::string log_excerpt;
  std::optional<FailureReason> failure_reason;

  static EvaluationResult success(double score, Direction d) {
    EvaluationResult r;
    r.valid = true;
    r.score = score;
    r.direction = d;
    return r;
  }

  static EvaluationResult failure(FailureReason why, Direction d, std::string log = {}) {
    EvaluationResult r;
    r.direction = d;
    r.failure_reason = why;
    r.log_excerpt = std::move(log);
    return r;
  }

  bool operator==(const EvaluationResult&) const = default;
};

struct Candidate {
  CandidateId id = 0;
  std::optional<CandidateId> parent_id;
  std::uint64_t iteration = 0;
  std::string program;
  std::string provider_id;
  std::string created_at;  // ISO-8601 UTC
  std::optional<EvaluationResult> result;

  bool is_valid() const { return result && result->valid; }

  bool operator==(const Candidate&) const = default;
};

struct TrajectoryPoint {
  std::uint64_t iteration = 0;
  double best_score = 0.0;
  CandidateId best_id = 0;
  std::uint64_t attempts_cumulative = 0;

  bool operator==(const TrajectoryPoint&) const = default;
};

struct RunReport {
  std::optional<CandidateId> best_candidate_id;
  Direction direction = Direction::maximize;
  std::vector<TrajectoryPoint> best_score_trajectory;
  std::uint64_t attempts = 0;
  std::uint64_t iterations_used = 0;
  StopReason stop_reason = StopReason::budget;

  bool operator==(const RunReport&) const = default;
};

// Error taxonomy. Everything derives from std::runtime_error so callers that
// only care about the message can catch that.

struct LineageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyResultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StorageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A candidate that parses but breaks a task constraint (infeasible packing,
// step values outside [0,1], degenerate sizes).
struct ConstraintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace discover
