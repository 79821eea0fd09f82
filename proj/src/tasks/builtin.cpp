#include "discover/tasks/builtin.hpp"

#include <chrono>

#include "discover/tasks/overlap.hpp"
#include "discover/tasks/packing.hpp"

namespace discover::tasks {

std::optional<Direction> builtin_direction(std::string_view task_id) {
  if (task_id == kCirclePacking) return Direction::maximize;
  if (task_id == kMinOverlap) return Direction::minimize;
  return std::nullopt;
}

namespace {

EvaluationResult evaluate_packing(std::string_view program, const EvaluatorSpec& spec) {
  const Packing p = parse_packing(program);
  EvaluationResult r;
  r.direction = Direction::maximize;
  r.metrics["n"] = static_cast<double>(p.size());
  try {
    r.score = score_packing(p, spec.feasibility_tol);
    r.valid = true;
    r.metrics["violations"] = 0.0;
  } catch (const InfeasiblePacking& e) {
    r.failure_reason = FailureReason::constraint;
    r.metrics["violations"] = static_cast<double>(e.violations.size());
    r.log_excerpt = e.what();
  }
  return r;
}

EvaluationResult evaluate_overlap(std::string_view program, const EvaluatorSpec& spec) {
  const StepFunction f = parse_step_function(program);
  const OverlapScore s = score_overlap(f, spec.formulation, spec.feasibility_tol);
  EvaluationResult r = EvaluationResult::success(s.value, Direction::minimize);
  r.metrics["m"] = static_cast<double>(f.pieces());
  r.metrics["argmax_shift"] = s.argmax_shift;
  return r;
}

}  // namespace

EvaluationResult evaluate_builtin(std::string_view program, const EvaluatorSpec& spec) {
  const auto direction = builtin_direction(spec.task_id);
  if (!direction) {
    throw ConfigError("evaluator.task_id", "unknown builtin task '" + spec.task_id + "'");
  }
  const auto start = std::chrono::steady_clock::now();
  EvaluationResult r;
  try {
    r = spec.task_id == kCirclePacking ? evaluate_packing(program, spec)
                                       : evaluate_overlap(program, spec);
  } catch (const FormatError& e) {
    r = EvaluationResult::failure(FailureReason::constraint, *direction,
                                  std::string("format: ") + e.what());
  } catch (const ConstraintError& e) {
    r = EvaluationResult::failure(FailureReason::constraint, *direction, e.what());
  }
  r.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace discover::tasks
