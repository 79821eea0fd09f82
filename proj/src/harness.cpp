#include "discover/harness.hpp"

#include <stdlib.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "discover/run_store.hpp"
#include "discover/serialize.hpp"
#include "discover/subprocess.hpp"
#include "discover/tasks/builtin.hpp"

namespace discover {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kLogExcerptBytes = 2000;

std::string tail(const std::string& text, std::size_t bytes) {
  if (text.size() <= bytes) return text;
  return "..." + text.substr(text.size() - bytes);
}

std::string read_or_empty(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string last_line(const std::string& text) {
  std::size_t end = text.find_last_not_of(" \t\r\n");
  if (end == std::string::npos) return {};
  const std::size_t start = text.rfind('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1,
                     end - (start == std::string::npos ? 0 : start + 1) + 1);
}

fs::path make_workdir() {
  std::string pattern = (fs::temp_directory_path() / "discover-eval-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) {
    throw std::runtime_error("cannot create evaluation directory under " +
                             fs::temp_directory_path().string());
  }
  return pattern;
}

double protocol_number(const Json& j, const char* key) {
  if (!j.is_number()) {
    throw ProtocolError(std::string("'") + key + "' must be a number");
  }
  return j.get<double>();
}

EvaluationResult postprocess(EvaluationResult r, const EvaluatorSpec& spec) {
  if (!r.valid) return r;
  try {
    if (!spec.validity_rules.empty() && !threshold_validity(r.metrics, spec.validity_rules)) {
      r.valid = false;
      r.failure_reason = FailureReason::constraint;
      r.log_excerpt += (r.log_excerpt.empty() ? "" : "\n");
      r.log_excerpt += "metric above its validity threshold";
      return r;
    }
    if (!spec.normalizers.empty()) {
      r.metrics["raw_score"] = r.score;
      r.score = mean_of_normalized(r.metrics, spec.normalizers);
    }
  } catch (const MetricError& e) {
    r.valid = false;
    r.failure_reason = FailureReason::protocol;
    r.log_excerpt += (r.log_excerpt.empty() ? "" : "\n");
    r.log_excerpt += e.what();
  }
  if (r.valid && !std::isfinite(r.score)) {
    r.valid = false;
    r.failure_reason = FailureReason::protocol;
    r.log_excerpt += "\nnon-finite normalized score";
  }
  return r;
}

}  // namespace

EvaluationResult parse_result(std::string_view line, Direction direction) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception&) {
    throw ProtocolError("last stdout line is not JSON: '" + tail(std::string(line), 200) + "'");
  }
  if (!j.is_object()) throw ProtocolError("result must be a JSON object");
  if (!j.contains("valid") || !j.at("valid").is_boolean()) {
    throw ProtocolError("result needs a boolean 'valid'");
  }
  if (!j.contains("score")) throw ProtocolError("result needs a numeric 'score'");

  EvaluationResult r;
  r.direction = direction;
  r.valid = j.at("valid").get<bool>();
  if (r.valid || !j.at("score").is_null()) {
    r.score = protocol_number(j.at("score"), "score");
  }
  if (r.valid && !std::isfinite(r.score)) {
    throw ProtocolError("valid result with non-finite score");
  }
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    if (!m.is_object()) throw ProtocolError("'metrics' must be an object");
    for (const auto& [name, value] : m.items()) {
      r.metrics[name] = protocol_number(value, "metrics");
    }
  }
  if (j.contains("direction")) {
    const auto& d = j.at("direction");
    if (!d.is_string() || d.get<std::string>() != to_string(direction)) {
      throw ProtocolError("result direction disagrees with the run");
    }
  }
  if (j.contains("duration_s")) r.duration_s = protocol_number(j.at("duration_s"), "duration_s");
  if (j.contains("log_excerpt")) {
    if (!j.at("log_excerpt").is_string()) throw ProtocolError("'log_excerpt' must be a string");
    r.log_excerpt = j.at("log_excerpt").get<std::string>();
  }
  if (j.contains("failure_reason") && !j.at("failure_reason").is_null()) {
    if (r.valid) throw ProtocolError("valid result carries a failure_reason");
    try {
      r.failure_reason = parse_failure_reason(j.at("failure_reason").get<std::string>());
    } catch (const std::exception& e) {
      throw ProtocolError(e.what());
    }
  }
  if (!r.valid && !r.failure_reason) r.failure_reason = FailureReason::constraint;
  return r;
}

std::string serialize_result(const EvaluationResult& result) { return to_json(result).dump(); }

double mean_of_normalized(const std::map<std::string, double>& metrics,
                          const std::map<std::string, Normalizer>& normalizers) {
  if (normalizers.empty()) throw MetricError("no normalizers given");
  double sum = 0.0;
  for (const auto& [name, norm] : normalizers) {
    const auto it = metrics.find(name);
    if (it == metrics.end()) throw MetricError("missing metric '" + name + "'");
    double v = it->second;
    if (norm.op == NormalizerOp::reciprocal_scale) {
      if (v == 0.0) throw MetricError("metric '" + name + "' is zero; cannot take c/x");
      v = norm.constant / v;
    }
    sum += v;
  }
  return sum / static_cast<double>(normalizers.size());
}

bool threshold_validity(const std::map<std::string, double>& metrics,
                        std::span<const ThresholdRule> rules) {
  bool ok = true;
  for (const auto& rule : rules) {
    const auto it = metrics.find(rule.metric);
    if (it == metrics.end()) throw MetricError("missing metric '" + rule.metric + "'");
    if (!(it->second <= rule.max_allowed)) ok = false;
  }
  return ok;
}

EvaluationResult evaluate_external(std::string_view program, const EvaluatorSpec& spec,
                                   Direction direction) {
  const fs::path workdir = make_workdir();
  const fs::path candidate = workdir / "candidate.txt";
  write_file_atomic(candidate, program);

  std::vector<std::string> argv{spec.command};
  for (const auto& arg : spec.args) {
    // Arguments naming files relative to the launch directory keep working
    // after the evaluator's cwd moves to the scratch directory.
    std::error_code ec;
    if (!arg.empty() && fs::path(arg).is_relative() && fs::exists(arg, ec)) {
      argv.push_back(fs::absolute(arg).string());
    } else {
      argv.push_back(arg);
    }
  }
  argv.push_back(candidate.string());

  ProcessOptions opts;
  opts.workdir = workdir;
  opts.stdout_path = workdir / "stdout.txt";
  opts.stderr_path = workdir / "stderr.txt";
  opts.timeout_s = spec.timeout_s;
  opts.extra_env.emplace_back("EVAL_TIMEOUT_S", format_double(spec.timeout_s));

  EvaluationResult r;
  ProcessOutcome outcome;
  try {
    outcome = run_process(argv, opts);
  } catch (const std::exception& e) {
    r = EvaluationResult::failure(FailureReason::crash, direction, e.what());
    r.log_excerpt += "\n[workdir kept: " + workdir.string() + "]";
    return r;
  }
  const std::string out = read_or_empty(opts.stdout_path);
  const std::string err = read_or_empty(opts.stderr_path);

  if (outcome.timed_out) {
    r = EvaluationResult::failure(FailureReason::timeout, direction,
                                  "timed out after " + format_double(spec.timeout_s) + " s\n" +
                                      tail(err, kLogExcerptBytes));
  } else if (!outcome.exit_code || *outcome.exit_code != 0) {
    const std::string how = outcome.exit_code
                                ? "exit code " + std::to_string(*outcome.exit_code)
                                : "signal " + std::to_string(outcome.term_signal.value_or(0));
    r = EvaluationResult::failure(FailureReason::crash, direction,
                                  how + "\n" + tail(err, kLogExcerptBytes));
  } else {
    try {
      r = parse_result(last_line(out), direction);
      r.log_excerpt = tail(err, kLogExcerptBytes);
    } catch (const ProtocolError& e) {
      r = EvaluationResult::failure(FailureReason::protocol, direction,
                                    std::string(e.what()) + "\n" + tail(out, kLogExcerptBytes));
    }
  }
  r.duration_s = outcome.duration_s;

  if (r.valid) {
    std::error_code ec;
    fs::remove_all(workdir, ec);
  } else {
    r.log_excerpt += "\n[workdir kept: " + workdir.string() + "]";
  }
  return r;
}

Harness::Harness(EvaluatorSpec spec, Direction direction)
    : spec_(std::move(spec)), direction_(direction) {}

void Harness::check_usable() const {
  if (spec_.kind == EvaluatorSpec::Kind::builtin) {
    const auto d = tasks::builtin_direction(spec_.task_id);
    if (!d) throw ConfigError("evaluator.task_id", "unknown builtin task '" + spec_.task_id + "'");
    if (*d != direction_) {
      throw ConfigError("direction", "builtin task " + spec_.task_id + " is scored with direction " +
                                         std::string(to_string(*d)));
    }
    return;
  }
  if (!find_executable(spec_.command)) {
    throw ConfigError("evaluator.command",
                      "'" + spec_.command + "' is not an executable file or on PATH");
  }
}

EvaluationResult Harness::evaluate(std::string_view program) const {
  EvaluationResult r = spec_.kind == EvaluatorSpec::Kind::builtin
                           ? tasks::evaluate_builtin(program, spec_)
                           : evaluate_external(program, spec_, direction_);
  return postprocess(std::move(r), spec_);
}

}  // namespace discover
