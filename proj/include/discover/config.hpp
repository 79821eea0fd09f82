#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "discover/types.hpp"

namespace discover {

enum class NormalizerOp { identity, reciprocal_scale };

struct Normalizer {
  NormalizerOp op = NormalizerOp::identity;
  double constant = 1.0;

  bool operator==(const Normalizer&) const = default;
};

struct ThresholdRule {
  std::string metric;
  double max_allowed = 0.0;

  bool operator==(const ThresholdRule&) const = default;
};

enum class OverlapFormulation { complement_correlation, self_convolution };

struct EvaluatorSpec {
  enum class Kind { builtin, external };

  Kind kind = Kind::builtin;
  std::string task_id;              // builtin: circle_packing | min_overlap
  OverlapFormulation formulation = OverlapFormulation::complement_correlation;
  double feasibility_tol = 1e-9;
  std::string command;              // external
  std::vector<std::string> args;    // external
  double timeout_s = 60.0;
  // Optional post-processing of reported metrics. When `normalizers` is
  // non-empty the score is replaced by their mean; `validity_rules` turn an
  // out-of-bounds metric into a constraint failure.
  std::map<std::string, Normalizer> normalizers;
  std::vector<ThresholdRule> validity_rules;

  bool operator==(const EvaluatorSpec&) const = default;
};

struct SelectionPolicy {
  double epsilon = 0.1;
  std::size_t top_k = 5;

  bool operator==(const SelectionPolicy&) const = default;
};

struct RetryPolicy {
  int max_attempts = 5;
  double initial_backoff_s = 1.0;
  double factor = 2.0;

  bool operator==(const RetryPolicy&) const = default;
};

struct ProviderSpec {
  enum class Kind { mock, http };

  Kind kind = Kind::mock;
  double step_scale = 0.01;  // mock
  std::string base_url;      // http, e.g. http://localhost:8000/v1
  std::string api_key;
  int max_output_tokens = 4096;
  double temperature = 0.7;
  int max_in_flight = 4;
  double request_timeout_s = 300.0;
  RetryPolicy retry;

  bool operator==(const ProviderSpec&) const = default;
};

struct RunConfig {
  std::string task_prompt;
  std::string initial_program;
  EvaluatorSpec evaluator;
  Direction direction = Direction::maximize;
  std::uint64_t max_iterations = 1;
  std::uint64_t parallelism = 1;
  std::map<std::string, double> model_weights{{"mock", 1.0}};
  double timeout_s = 60.0;
  std::uint64_t seed = 0;
  std::optional<double> target_score;

  ProviderSpec provider;
  SelectionPolicy selection;
  std::size_t history_cap = 4;
  bool allow_invalid_seed = false;
  // Replace wall-clock fields (created_at, duration_s) with logical values so
  // that identical runs write identical files.
  bool reproducible = false;

  bool operator==(const RunConfig&) const = default;
};

/// Checks the cross-field invariants; throws ConfigError naming the field.
void validate(const RunConfig& config);

/// Parses a JSON config document. `base_dir` resolves `initial_program_file`.
RunConfig parse_run_config(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});

RunConfig load_run_config(const std::filesystem::path& path);

/// Applies DISCOVER_API_KEY / DISCOVER_BASE_URL when set.
void apply_environment_overrides(RunConfig& config);

std::string dump_run_config(const RunConfig& config);

}  // namespace discover
