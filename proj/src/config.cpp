#include "discover/config.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

#include "discover/run_store.hpp"
#include "discover/serialize.hpp"
#include "discover/tasks/builtin.hpp"

namespace discover {

namespace {

void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(where.empty() ? key : where + "." + key, "unknown field");
    }
  }
}

template <typename T>
T field(const Json& j, const std::string& name, const std::string& where) {
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where.empty() ? name : where + "." + name, e.what());
  }
}

template <typename T>
void optional_field(const Json& j, const std::string& name, const std::string& where, T& out) {
  if (j.contains(name) && !j.at(name).is_null()) {
    out = field<T>(j, name, where);
  }
}

NormalizerOp parse_normalizer_op(const std::string& s) {
  if (s == "identity") return NormalizerOp::identity;
  if (s == "reciprocal_scale") return NormalizerOp::reciprocal_scale;
  throw ConfigError("evaluator.normalizers", "unknown op '" + s + "'");
}

std::string_view to_string(NormalizerOp op) {
  return op == NormalizerOp::identity ? "identity" : "reciprocal_scale";
}

OverlapFormulation parse_formulation(const std::string& s) {
  if (s == "complement_correlation") return OverlapFormulation::complement_correlation;
  if (s == "self_convolution") return OverlapFormulation::self_convolution;
  throw ConfigError("evaluator.formulation", "unknown formulation '" + s + "'");
}

std::string_view to_string(OverlapFormulation f) {
  return f == OverlapFormulation::complement_correlation ? "complement_correlation"
                                                         : "self_convolution";
}

EvaluatorSpec parse_evaluator(const Json& j, double default_timeout) {
  const std::string where = "evaluator";
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  reject_unknown_keys(j,
                      {"kind", "task_id", "formulation", "feasibility_tol", "command", "args",
                       "timeout_s", "normalizers", "validity_rules"},
                      where);
  EvaluatorSpec spec;
  spec.timeout_s = default_timeout;
  const auto kind = field<std::string>(j, "kind", where);
  if (kind == "builtin") {
    spec.kind = EvaluatorSpec::Kind::builtin;
    spec.task_id = field<std::string>(j, "task_id", where);
  } else if (kind == "external") {
    spec.kind = EvaluatorSpec::Kind::external;
    spec.command = field<std::string>(j, "command", where);
    optional_field(j, "args", where, spec.args);
  } else {
    throw ConfigError("evaluator.kind", "expected 'builtin' or 'external', got '" + kind + "'");
  }
  if (j.contains("formulation")) {
    spec.formulation = parse_formulation(field<std::string>(j, "formulation", where));
  }
  optional_field(j, "feasibility_tol", where, spec.feasibility_tol);
  optional_field(j, "timeout_s", where, spec.timeout_s);
  if (j.contains("normalizers")) {
    for (const auto& [name, n] : j.at("normalizers").items()) {
      Normalizer norm;
      norm.op = parse_normalizer_op(field<std::string>(n, "op", "evaluator.normalizers." + name));
      optional_field(n, "constant", "evaluator.normalizers." + name, norm.constant);
      spec.normalizers[name] = norm;
    }
  }
  if (j.contains("validity_rules")) {
    for (const auto& rule : j.at("validity_rules")) {
      spec.validity_rules.push_back({field<std::string>(rule, "metric", "evaluator.validity_rules"),
                                     field<double>(rule, "max_allowed", "evaluator.validity_rules")});
    }
  }
  return spec;
}

ProviderSpec parse_provider(const Json& j) {
  const std::string where = "provider";
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  reject_unknown_keys(j,
                      {"kind", "step_scale", "base_url", "api_key", "max_output_tokens",
                       "temperature", "max_in_flight", "request_timeout_s", "retry"},
                      where);
  ProviderSpec spec;
  const auto kind = field<std::string>(j, "kind", where);
  if (kind == "mock") {
    spec.kind = ProviderSpec::Kind::mock;
  } else if (kind == "http") {
    spec.kind = ProviderSpec::Kind::http;
  } else {
    throw ConfigError("provider.kind", "expected 'mock' or 'http', got '" + kind + "'");
  }
  optional_field(j, "step_scale", where, spec.step_scale);
  optional_field(j, "base_url", where, spec.base_url);
  optional_field(j, "api_key", where, spec.api_key);
  optional_field(j, "max_output_tokens", where, spec.max_output_tokens);
  optional_field(j, "temperature", where, spec.temperature);
  optional_field(j, "max_in_flight", where, spec.max_in_flight);
  optional_field(j, "request_timeout_s", where, spec.request_timeout_s);
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    reject_unknown_keys(r, {"max_attempts", "initial_backoff_s", "factor"}, "provider.retry");
    optional_field(r, "max_attempts", "provider.retry", spec.retry.max_attempts);
    optional_field(r, "initial_backoff_s", "provider.retry", spec.retry.initial_backoff_s);
    optional_field(r, "factor", "provider.retry", spec.retry.factor);
  }
  return spec;
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.max_iterations < 1) throw ConfigError("max_iterations", "must be >= 1");
  if (c.parallelism < 1) throw ConfigError("parallelism", "must be >= 1");
  if (!(c.timeout_s > 0)) throw ConfigError("timeout_s", "must be > 0");
  if (c.model_weights.empty()) throw ConfigError("model_weights", "needs at least one model");
  double sum = 0.0;
  for (const auto& [model, w] : c.model_weights) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ConfigError("model_weights", "weight of '" + model + "' must lie in [0, 1]");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("model_weights", "weights sum to " + format_double(sum) + ", expected 1");
  }
  if (c.target_score && !std::isfinite(*c.target_score)) {
    throw ConfigError("target_score", "must be finite");
  }
  if (!(c.selection.epsilon >= 0.0 && c.selection.epsilon <= 1.0)) {
    throw ConfigError("selection.epsilon", "must lie in [0, 1]");
  }
  if (c.selection.top_k < 1) throw ConfigError("selection.top_k", "must be >= 1");

  const auto& e = c.evaluator;
  if (!(e.timeout_s > 0)) throw ConfigError("evaluator.timeout_s", "must be > 0");
  if (e.kind == EvaluatorSpec::Kind::builtin) {
    const auto d = tasks::builtin_direction(e.task_id);
    if (!d) {
      throw ConfigError("evaluator.task_id",
                        "unknown builtin task '" + e.task_id +
                            "' (expected circle_packing or min_overlap)");
    }
    if (*d != c.direction) {
      throw ConfigError("direction", "builtin task " + e.task_id + " is scored with direction " +
                                         std::string(to_string(*d)));
    }
  } else if (e.command.empty()) {
    throw ConfigError("evaluator.command", "must not be empty");
  }
  if (!(e.feasibility_tol >= 0)) throw ConfigError("evaluator.feasibility_tol", "must be >= 0");

  const auto& p = c.provider;
  if (p.kind == ProviderSpec::Kind::mock && !(p.step_scale >= 0)) {
    throw ConfigError("provider.step_scale", "must be >= 0");
  }
  if (p.max_output_tokens < 1) throw ConfigError("provider.max_output_tokens", "must be >= 1");
  if (!(p.temperature >= 0)) throw ConfigError("provider.temperature", "must be >= 0");
  if (p.max_in_flight < 1) throw ConfigError("provider.max_in_flight", "must be >= 1");
  if (p.retry.max_attempts < 1) throw ConfigError("provider.retry.max_attempts", "must be >= 1");
  if (!(p.retry.initial_backoff_s >= 0)) {
    throw ConfigError("provider.retry.initial_backoff_s", "must be >= 0");
  }
  if (!(p.retry.factor >= 1)) throw ConfigError("provider.retry.factor", "must be >= 1");
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ConfigError("<config>", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<config>", "expected a JSON object");
  reject_unknown_keys(j,
                      {"task_prompt", "initial_program", "initial_program_file", "evaluator",
                       "direction", "max_iterations", "parallelism", "model_weights", "timeout_s",
                       "seed", "target_score", "provider", "selection", "history_cap",
                       "allow_invalid_seed", "reproducible"},
                      "");

  RunConfig c;
  optional_field(j, "task_prompt", "", c.task_prompt);
  if (j.contains("initial_program") && j.contains("initial_program_file")) {
    throw ConfigError("initial_program", "give either initial_program or initial_program_file");
  }
  if (j.contains("initial_program")) {
    c.initial_program = field<std::string>(j, "initial_program", "");
  } else if (j.contains("initial_program_file")) {
    const auto rel = field<std::string>(j, "initial_program_file", "");
    const auto path = base_dir / rel;
    try {
      c.initial_program = read_file(path);
    } catch (const StorageError&) {
      throw ConfigError("initial_program_file", "cannot read " + path.string());
    }
  } else {
    throw ConfigError("initial_program", "missing");
  }
  if (j.contains("direction")) {
    try {
      c.direction = parse_direction(field<std::string>(j, "direction", ""));
    } catch (const FormatError& e) {
      throw ConfigError("direction", e.what());
    }
  }
  optional_field(j, "max_iterations", "", c.max_iterations);
  optional_field(j, "parallelism", "", c.parallelism);
  if (j.contains("model_weights")) {
    c.model_weights = field<std::map<std::string, double>>(j, "model_weights", "");
  }
  optional_field(j, "timeout_s", "", c.timeout_s);
  optional_field(j, "seed", "", c.seed);
  if (j.contains("target_score") && !j.at("target_score").is_null()) {
    c.target_score = field<double>(j, "target_score", "");
  }
  if (!j.contains("evaluator")) throw ConfigError("evaluator", "missing");
  c.evaluator = parse_evaluator(j.at("evaluator"), c.timeout_s);
  if (j.contains("provider")) c.provider = parse_provider(j.at("provider"));
  if (j.contains("selection")) {
    const auto& s = j.at("selection");
    reject_unknown_keys(s, {"epsilon", "top_k"}, "selection");
    optional_field(s, "epsilon", "selection", c.selection.epsilon);
    optional_field(s, "top_k", "selection", c.selection.top_k);
  }
  optional_field(j, "history_cap", "", c.history_cap);
  optional_field(j, "allow_invalid_seed", "", c.allow_invalid_seed);
  optional_field(j, "reproducible", "", c.reproducible);

  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const StorageError&) {
    throw ConfigError("<config>", "cannot read " + path.string());
  }
  return parse_run_config(text, path.parent_path());
}

void apply_environment_overrides(RunConfig& config) {
  if (const char* key = std::getenv("DISCOVER_API_KEY"); key != nullptr && *key != '\0') {
    config.provider.api_key = key;
  }
  if (const char* url = std::getenv("DISCOVER_BASE_URL"); url != nullptr && *url != '\0') {
    config.provider.base_url = url;
  }
}

std::string dump_run_config(const RunConfig& c) {
  Json j;
  j["task_prompt"] = c.task_prompt;
  j["initial_program"] = c.initial_program;

  Json e;
  const auto& ev = c.evaluator;
  if (ev.kind == EvaluatorSpec::Kind::builtin) {
    e["kind"] = "builtin";
    e["task_id"] = ev.task_id;
    e["formulation"] = to_string(ev.formulation);
    e["feasibility_tol"] = ev.feasibility_tol;
  } else {
    e["kind"] = "external";
    e["command"] = ev.command;
    e["args"] = ev.args;
  }
  e["timeout_s"] = ev.timeout_s;
  if (!ev.normalizers.empty()) {
    e["normalizers"] = Json::object();
    for (const auto& [name, n] : ev.normalizers) {
      e["normalizers"][name] = {{"op", to_string(n.op)}, {"constant", n.constant}};
    }
  }
  if (!ev.validity_rules.empty()) {
    e["validity_rules"] = Json::array();
    for (const auto& r : ev.validity_rules) {
      e["validity_rules"].push_back({{"metric", r.metric}, {"max_allowed", r.max_allowed}});
    }
  }
  j["evaluator"] = std::move(e);

  j["direction"] = to_string(c.direction);
  j["max_iterations"] = c.max_iterations;
  j["parallelism"] = c.parallelism;
  j["model_weights"] = c.model_weights;
  j["timeout_s"] = c.timeout_s;
  j["seed"] = c.seed;
  j["target_score"] = c.target_score ? Json(*c.target_score) : Json(nullptr);

  Json p;
  const auto& pv = c.provider;
  p["kind"] = pv.kind == ProviderSpec::Kind::mock ? "mock" : "http";
  p["step_scale"] = pv.step_scale;
  p["base_url"] = pv.base_url;
  // The API key is deliberately not persisted.
  p["max_output_tokens"] = pv.max_output_tokens;
  p["temperature"] = pv.temperature;
  p["max_in_flight"] = pv.max_in_flight;
  p["request_timeout_s"] = pv.request_timeout_s;
  p["retry"] = {{"max_attempts", pv.retry.max_attempts},
                {"initial_backoff_s", pv.retry.initial_backoff_s},
                {"factor", pv.retry.factor}};
  j["provider"] = std::move(p);

  j["selection"] = {{"epsilon", c.selection.epsilon}, {"top_k", c.selection.top_k}};
  j["history_cap"] = c.history_cap;
  j["allow_invalid_seed"] = c.allow_invalid_seed;
  j["reproducible"] = c.reproducible;
  return j.dump(2) + "\n";
}

}  // namespace discover
