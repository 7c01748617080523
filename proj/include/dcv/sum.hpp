#pragma once

// Exact floating-point summation.
//
// ExactSum keeps the running sum as a list of non-overlapping partials
// (Shewchuk's expansion arithmetic, the algorithm behind Python's math.fsum).
// value() is the correctly rounded value of the true real sum, so the result
// does not depend on the order in which terms were added. That property is
// the summation contract the estimator relies on: reductions over multisets
// of doubles (distance rows, delta entries) give bit-identical results under
// any permutation of the input.

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace dcv {

class ExactSum {
 public:
  void add(double x) {
    std::size_t kept = 0;
    for (std::size_t j = 0; j < partials_.size(); ++j) {
      double y = partials_[j];
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[kept++] = lo;
      x = hi;
    }
    partials_.resize(kept);
    partials_.push_back(x);
  }

  void add(std::span<const double> xs) {
    for (double x : xs) add(x);
  }

  // Correctly rounded sum of everything added so far. Ties across partials
  // are resolved toward even, matching a single rounding of the exact sum.
  [[nodiscard]] double value() const {
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      const double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                  (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

  void reset() { partials_.clear(); }

 private:
  std::vector<double> partials_;
};

[[nodiscard]] inline double exact_sum(std::span<const double> xs) {
  ExactSum s;
  s.add(xs);
  return s.value();
}

// Neumaier compensated accumulator for hot loops where exactness is not
// required but stable fixed-order summation is.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace dcv
