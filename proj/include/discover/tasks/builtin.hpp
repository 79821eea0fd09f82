#pragma once

#include <optional>
#include <string_view>

#include "discover/config.hpp"
#include "discover/types.hpp"

namespace discover::tasks {

inline constexpr std::string_view kCirclePacking = "circle_packing";
inline constexpr std::string_view kMinOverlap = "min_overlap";

/// Optimization direction of a builtin task, or nullopt for an unknown id.
std::optional<Direction> builtin_direction(std::string_view task_id);

/// Scores `program` in-process. Malformed or infeasible candidates come back
/// as valid=false with failure_reason=constraint; never throws for bad input.
EvaluationResult evaluate_builtin(std::string_view program, const EvaluatorSpec& spec);

}  // namespace discover::tasks
