#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "discover/providers.hpp"
#include "discover/tasks/overlap.hpp"
#include "discover/tasks/packing.hpp"

namespace discover {

namespace {

constexpr std::size_t kMaxPerturbed = 8;

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return unit_uniform(rng_); }

  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

  // Box-Muller, one draw per call.
  double normal(double sigma) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Distinct indices in [0, n), between 1 and min(n, kMaxPerturbed) of them.
  std::vector<std::size_t> subset(std::size_t n) {
    const std::size_t count = 1 + index(std::min(n, kMaxPerturbed));
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(all[i], all[i + index(n - i)]);
    }
    all.resize(count);
    std::sort(all.begin(), all.end());
    return all;
  }

 private:
  std::mt19937_64 rng_;
};

std::string mutate_packing(std::string_view text, Gaussian& g, double scale) {
  tasks::Packing p = tasks::parse_packing(text);
  if (p.circles.empty()) return std::string(text);
  for (std::size_t k : g.subset(3 * p.size())) {
    auto& c = p.circles[k / 3];
    switch (k % 3) {
      case 0:
        c.x = std::clamp(c.x + g.normal(scale), 0.0, 1.0);
        break;
      case 1:
        c.y = std::clamp(c.y + g.normal(scale), 0.0, 1.0);
        break;
      default:
        c.r = std::max(0.0, c.r + g.normal(scale));
        break;
    }
  }
  return tasks::format_packing(p);
}

// Shift every value by a common offset c (then clamp to [0,1]) so that the
// mean is 1/2, i.e. the integral over [0,2] is one. The clamped sum is
// monotone in c, so bisection finds it.
void restore_unit_integral(std::vector<double>& v) {
  const double target = 0.5 * static_cast<double>(v.size());
  const auto clamped_sum = [&](double c) {
    double s = 0.0;
    for (double x : v) s += std::clamp(x + c, 0.0, 1.0);
    return s;
  };
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && lo < hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (clamped_sum(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double c = std::abs(clamped_sum(lo) - target) <= std::abs(clamped_sum(hi) - target) ? lo : hi;
  for (double& x : v) x = std::clamp(x + c, 0.0, 1.0);
}

std::string mutate_step(std::string_view text, Gaussian& g, double scale) {
  tasks::StepFunction f = tasks::parse_step_function(text);
  if (f.values.empty()) return std::string(text);
  for (std::size_t k : g.subset(f.pieces())) {
    f.values[k] = std::clamp(f.values[k] + g.normal(scale), 0.0, 1.0);
  }
  restore_unit_integral(f.values);
  return tasks::format_step_function(f);
}

}  // namespace

std::string mock_mutate(std::string_view parent_program, std::uint64_t seed, double step_scale) {
  const auto first = parent_program.find_first_not_of(" \t\r\n");
  const std::string_view body =
      first == std::string_view::npos ? std::string_view{} : parent_program.substr(first);
  const bool packing = body.starts_with("packing");
  const bool step = body.starts_with("step");
  if (!packing && !step) {
    throw FormatError("mock provider needs a 'packing n=' or 'step m=' program");
  }
  if (step_scale == 0.0) {
    // Still reject unparseable parents.
    packing ? (void)tasks::parse_packing(body) : (void)tasks::parse_step_function(body);
    return std::string(parent_program);
  }
  Gaussian g(seed);
  return packing ? mutate_packing(body, g, step_scale) : mutate_step(body, g, step_scale);
}

std::string MockProvider::generate(const GenerationRequest& request) {
  std::string out;
  try {
    out = mock_mutate(request.prompt.parent_program, request.seed, step_scale_);
  } catch (const FormatError& e) {
    throw GenerationError(std::string("mock provider: ") + e.what());
  }
  if (out.empty()) throw GenerationError("mock provider produced an empty program");
  return out;
}

}  // namespace discover
