#pragma once

#include <vector>

namespace discover {

// Correctly rounded floating-point summation (Shewchuk's partials, as in
// Python's math.fsum). The result depends only on the multiset of addends.
class ExactSum {
 public:
  void add(double x);
  double value() const;

 private:
  std::vector<double> partials_;
};

}  // namespace discover
