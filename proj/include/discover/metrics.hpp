#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "discover/types.hpp"

namespace discover {

/// Iterations spent by a search that issued `attempts` generations,
/// `parallelism` at a time: ceil(attempts / parallelism).
/// Throws std::invalid_argument unless both are >= 1.
std::uint64_t count_iterations(std::uint64_t attempts, std::uint64_t parallelism);

/// baseline / ours. Throws std::invalid_argument unless both are >= 1.
double compute_speedup(double baseline_iterations, double ours_iterations);

/// (old - new) / old * 100. Throws std::invalid_argument unless old > 0.
double percent_improvement(double old_value, double new_value);

/// Rounds to `decimals` places, halves away from zero.
double round_to(double value, int decimals);

/// First trajectory iteration whose best-so-far meets `threshold`
/// (>= when maximizing, <= when minimizing); nullopt if never.
std::optional<std::uint64_t> iterations_to_threshold(std::span<const TrajectoryPoint> trajectory,
                                                     double threshold, Direction direction);

}  // namespace discover
