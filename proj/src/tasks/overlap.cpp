#include "discover/tasks/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "discover/exact_sum.hpp"
#include "discover/serialize.hpp"
#include "discover/tasks/text_format.hpp"

namespace discover::tasks {

bool check_unit_integral(const StepFunction& f, double tol) {
  if (f.values.empty()) return false;
  ExactSum sum;
  for (double v : f.values) sum.add(v);
  return std::abs(f.width() * sum.value() - 1.0) <= tol;
}

void validate_step_function(const StepFunction& f, double tol) {
  if (f.values.empty()) {
    throw ConstraintError("step function has no pieces");
  }
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double v = f.values[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConstraintError("step value " + std::to_string(i) + " = " + format_double(v) +
                            " lies outside [0, 1]");
    }
  }
  if (!check_unit_integral(f, tol)) {
    throw ConstraintError("step function integral differs from 1 by more than " +
                          format_double(tol));
  }
}

OverlapScore score_overlap(const StepFunction& f, OverlapFormulation formulation, double tol) {
  validate_step_function(f, tol);
  const auto& v = f.values;
  const long m = static_cast<long>(v.size());
  const double w = f.width();

  OverlapScore best;
  best.formulation = formulation;
  bool first = true;
  const auto consider = [&](double value, double shift) {
    if (first || value > best.value) {
      best.value = value;
      best.argmax_shift = shift;
      first = false;
    }
  };

  if (formulation == OverlapFormulation::complement_correlation) {
    std::vector<double> complement(v.size());
    std::transform(v.begin(), v.end(), complement.begin(), [](double x) { return 1.0 - x; });
    // Shift k = j*w pairs piece i of f with piece i+j of 1-f.
    for (long j = -(m - 1); j <= m - 1; ++j) {
      ExactSum sum;
      const long lo = std::max(0L, -j);
      const long hi = std::min(m, m - j);
      for (long i = lo; i < hi; ++i) {
        sum.add(v[i] * complement[i + j]);
      }
      consider(w * sum.value(), static_cast<double>(j) * w);
    }
  } else {
    // t = j*w pairs piece i with piece j-1-i.
    for (long j = 1; j <= 2 * m - 1; ++j) {
      ExactSum sum;
      const long lo = std::max(0L, j - m);
      const long hi = std::min(m, j);
      for (long i = lo; i < hi; ++i) {
        sum.add(v[i] * v[j - 1 - i]);
      }
      consider(w * sum.value(), static_cast<double>(j) * w);
    }
  }
  return best;
}

namespace {

void check_partition(int n, const std::set<int>& a) {
  if (n < 1) {
    throw ConstraintError("partition size n must be >= 1");
  }
  if (static_cast<int>(a.size()) != n) {
    throw ConstraintError("|A| = " + std::to_string(a.size()) + ", expected " +
                          std::to_string(n));
  }
  if (*a.begin() < 1 || *a.rbegin() > 2 * n) {
    throw ConstraintError("A must be a subset of {1.." + std::to_string(2 * n) + "}");
  }
}

}  // namespace

long discrete_overlap_oracle(int n, const std::set<int>& a) {
  check_partition(n, a);
  std::map<int, long> counts;
  for (int x : a) {
    for (int b = 1; b <= 2 * n; ++b) {
      if (!a.contains(b)) ++counts[x - b];
    }
  }
  long best = 0;
  for (const auto& [k, count] : counts) best = std::max(best, count);
  return best;
}

StepFunction indicator_step_function(int n, const std::set<int>& a) {
  check_partition(n, a);
  StepFunction f;
  f.values.assign(static_cast<std::size_t>(2 * n), 0.0);
  for (int x : a) f.values[static_cast<std::size_t>(x - 1)] = 1.0;
  return f;
}

StepFunction parse_step_function(std::string_view text) {
  detail::Tokens tokens(text);
  const std::size_t m = tokens.header("step", "m");
  StepFunction f;
  f.values.reserve(m);
  for (std::size_t i = 0; i < m; ++i) f.values.push_back(tokens.next_double("step value"));
  tokens.expect_end();
  return f;
}

std::string format_step_function(const StepFunction& f) {
  std::string out = "step m=" + std::to_string(f.pieces()) + "\n";
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (i > 0) out += (i % 8 == 0) ? '\n' : ' ';
    out += format_double(f.values[i]);
  }
  out += '\n';
  return out;
}

}  // namespace discover::tasks
