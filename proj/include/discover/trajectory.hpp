#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "discover/database.hpp"

namespace discover {

struct TrajectoryRow {
  std::uint64_t iteration = 0;
  std::uint64_t attempts_cumulative = 0;
  double best_score = 0.0;
  CandidateId best_id = 0;
};

struct TrajectoryTable {
  Direction direction = Direction::maximize;
  std::vector<TrajectoryRow> rows;
};

/// Rows from the report's trajectory, cross-checked against the database:
/// every best_id must exist, be valid and carry the recorded score, and the
/// series must be monotone. Throws StorageError on any mismatch.
TrajectoryTable build_trajectory(const RunReport& report, const ProgramDatabase& db);

/// Loads db.jsonl and report.json from `run_dir` and builds the table.
TrajectoryTable load_trajectory(const std::filesystem::path& run_dir);

/// CSV with the fixed header
///   iteration,attempts_cumulative,best_score,best_id
/// plus a trailing `display_score` column (= c / best_score) when `scale_c`
/// is given.
std::string to_csv(const TrajectoryTable& table, std::optional<double> scale_c = std::nullopt);

/// Static SVG line chart of best score (or c / score) against iteration.
std::string to_svg(const TrajectoryTable& table, std::optional<double> scale_c = std::nullopt);

struct ThresholdComparison {
  std::optional<std::uint64_t> iterations_a;
  std::optional<std::uint64_t> iterations_b;
  std::optional<double> speedup;  // iterations_a / iterations_b when both reached (>= 1)
};

/// Iterations-to-threshold of two runs and their ratio. Both tables must
/// share a direction (std::invalid_argument otherwise).
ThresholdComparison compare_runs(const TrajectoryTable& a, const TrajectoryTable& b,
                                 double threshold);

}  // namespace discover
