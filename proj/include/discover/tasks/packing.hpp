#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "discover/types.hpp"

namespace discover::tasks {

struct Circle {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;

  bool operator==(const Circle&) const = default;
};

// n circles inside the unit square [0,1]^2.
struct Packing {
  std::vector<Circle> circles;

  std::size_t size() const { return circles.size(); }
  bool operator==(const Packing&) const = default;
};

enum class Side { left, right, bottom, top };

struct PackingViolation {
  enum class Kind { boundary, overlap };

  Kind kind = Kind::boundary;
  std::size_t i = 0;
  std::optional<std::size_t> j;  // overlap only
  std::optional<Side> side;      // boundary only
  double amount = 0.0;           // how far past the tolerance-free limit

  std::string describe() const;
};

struct InfeasiblePacking : ConstraintError {
  explicit InfeasiblePacking(std::vector<PackingViolation> v);
  std::vector<PackingViolation> violations;
};

/// Every boundary excursion (per side) and every overlapping pair.
/// An empty result means the packing is feasible.
std::vector<PackingViolation> validate_packing(const Packing& p, double tol = 1e-9);

/// Sum of radii. Throws InfeasiblePacking when validate_packing reports
/// anything, ConstraintError for an empty packing or non-finite values.
double score_packing(const Packing& p, double tol = 1e-9);

/// Parses `packing n=<n>` followed by n lines of `x y r`.
Packing parse_packing(std::string_view text);
std::string format_packing(const Packing& p);

}  // namespace discover::tasks
