#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "discover/config.hpp"
#include "discover/types.hpp"

namespace discover {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses the evaluator's final stdout line.
///
/// Required keys: `valid` (boolean) and `score` (number). Optional:
/// `metrics` (object of numbers) plus the remaining EvaluationResult fields,
/// so parse_result(serialize_result(r)) == r. A declared-invalid result
/// without a failure_reason becomes a constraint failure. Throws
/// ProtocolError on anything else.
EvaluationResult parse_result(std::string_view last_line, Direction direction);

/// Single-line JSON form of a result, accepted back by parse_result.
std::string serialize_result(const EvaluationResult& result);

/// Mean of the normalized metrics named in `normalizers`
/// (identity: x, reciprocal_scale: c / x).
/// Throws MetricError for a missing metric or a zero divisor.
double mean_of_normalized(const std::map<std::string, double>& metrics,
                          const std::map<std::string, Normalizer>& normalizers);

/// True iff every rule's metric is <= its bound (inclusive).
/// Throws MetricError for a missing metric.
bool threshold_validity(const std::map<std::string, double>& metrics,
                        std::span<const ThresholdRule> rules);

/// Runs `program` through an external evaluator:
///
///   <command> <args...> <workdir>/candidate.txt
///
/// inside a fresh temporary working directory, with EVAL_TIMEOUT_S set.
/// The directory is removed when the result is valid and kept otherwise
/// (its path is appended to log_excerpt).
EvaluationResult evaluate_external(std::string_view program, const EvaluatorSpec& spec,
                                   Direction direction);

// Evaluator front-end shared by the engine and the CLI. Dispatches to the
// builtin tasks or an external command, then applies the spec's normalizers
// and validity rules. Stateless after construction; safe to call from
// several threads at once.
class Harness {
 public:
  Harness(EvaluatorSpec spec, Direction direction);

  /// Throws ConfigError if the evaluator cannot be used at all (unknown
  /// builtin, missing or non-executable command).
  void check_usable() const;

  EvaluationResult evaluate(std::string_view program) const;

  const EvaluatorSpec& spec() const { return spec_; }
  Direction direction() const { return direction_; }

 private:
  EvaluatorSpec spec_;
  Direction direction_;
};

}  // namespace discover
