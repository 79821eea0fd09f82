#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "discover/config.hpp"

namespace discover::tasks {

// Step function on [0, 2] with m equal pieces of width 2/m, values in [0, 1].
struct StepFunction {
  std::vector<double> values;

  std::size_t pieces() const { return values.size(); }
  double width() const { return 2.0 / static_cast<double>(values.size()); }
  bool operator==(const StepFunction&) const = default;
};

struct OverlapScore {
  double value = 0.0;
  // Shift attaining the maximum: k in [-2, 2] for the complement correlation,
  // t in [0, 4] for the self-convolution.
  double argmax_shift = 0.0;
  OverlapFormulation formulation = OverlapFormulation::complement_correlation;
};

/// |(2/m) * sum(values) - 1| <= tol. False for m = 0.
bool check_unit_integral(const StepFunction& f, double tol = 1e-9);

/// Throws ConstraintError unless m >= 1, all values lie in [0, 1] and the
/// integral is one within `tol`.
void validate_step_function(const StepFunction& f, double tol = 1e-9);

/// Exact maximum of the overlap functional.
///
///   complement_correlation: max_k  integral f(x) (1 - f(x + k)) dx
///   self_convolution:       max_t  integral f(x) f(t - x) dx
///
/// Both objectives are piecewise linear in the shift with breakpoints at
/// multiples of 2/m, so the maximum is attained at a breakpoint; every
/// breakpoint is evaluated. Sums are correctly rounded, which makes the
/// result independent of summation order (reversing f gives bitwise the
/// same value).
OverlapScore score_overlap(const StepFunction& f,
                           OverlapFormulation formulation = OverlapFormulation::complement_correlation,
                           double tol = 1e-9);

/// max_k |{(a, b) in A x B : a - b = k}| with B = {1..2n} \ A, by counting.
/// Throws ConstraintError unless A is an n-element subset of {1..2n}.
long discrete_overlap_oracle(int n, const std::set<int>& a);

/// Lifts a partition of {1..2n} to the 2n-piece indicator step function.
StepFunction indicator_step_function(int n, const std::set<int>& a);

/// Parses `step m=<m>` followed by m whitespace-separated values.
StepFunction parse_step_function(std::string_view text);
std::string format_step_function(const StepFunction& f);

}  // namespace discover::tasks
