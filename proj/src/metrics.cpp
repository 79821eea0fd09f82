#include "discover/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace discover {

std::uint64_t count_iterations(std::uint64_t attempts, std::uint64_t parallelism) {
  if (attempts < 1 || parallelism < 1) {
    throw std::invalid_argument("count_iterations needs attempts >= 1 and parallelism >= 1");
  }
  return attempts / parallelism + (attempts % parallelism != 0 ? 1 : 0);
}

double compute_speedup(double baseline_iterations, double ours_iterations) {
  if (!(baseline_iterations >= 1) || !(ours_iterations >= 1)) {
    throw std::invalid_argument("compute_speedup needs both iteration counts >= 1");
  }
  return baseline_iterations / ours_iterations;
}

double percent_improvement(double old_value, double new_value) {
  if (!(old_value > 0)) {
    throw std::invalid_argument("percent_improvement needs old_value > 0");
  }
  return (old_value - new_value) / old_value * 100.0;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::optional<std::uint64_t> iterations_to_threshold(std::span<const TrajectoryPoint> trajectory,
                                                     double threshold, Direction direction) {
  for (const auto& p : trajectory) {
    if (meets(p.best_score, threshold, direction)) return p.iteration;
  }
  return std::nullopt;
}

}  // namespace discover
