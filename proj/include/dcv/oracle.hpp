#pragma once

// Brute-force reference route for the estimator.
//
// The 6-point product kernel
//   h(z1..z6) = f(x1,x2,x3,x4) * f(y1,y2,y5,y6),
//   f(a,b,c,e) = d(a,b) - d(a,c) - d(b,e) + d(c,e),
// averaged over ALL n^6 index tuples equals dcov of the empirical measure.
// Summing h itself suffices: symmetrizing h only permutes tuples inside the
// full product sum, so the symmetrized and raw kernels have the same
// V-statistic. This route shares nothing with the centering pipeline beyond
// the distance matrix, which is what makes it a useful oracle.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "dcv/dcov.hpp"
#include "dcv/sample.hpp"
#include "dcv/sum.hpp"

namespace dcv {

[[nodiscard]] inline double four_point_kernel(const Eigen::MatrixXd& d, std::size_t i1,
                                              std::size_t i2, std::size_t i3,
                                              std::size_t i4) {
  const auto a = static_cast<Eigen::Index>(i1);
  const auto b = static_cast<Eigen::Index>(i2);
  const auto c = static_cast<Eigen::Index>(i3);
  const auto e = static_cast<Eigen::Index>(i4);
  return d(a, b) - d(a, c) - d(b, e) + d(c, e);
}

[[nodiscard]] inline double six_point_kernel(const Eigen::MatrixXd& dx,
                                             const Eigen::MatrixXd& dy,
                                             const std::array<std::size_t, 6>& z) {
  return four_point_kernel(dx, z[0], z[1], z[2], z[3]) *
         four_point_kernel(dy, z[0], z[1], z[4], z[5]);
}

// (1/n^6) sum over all 6-tuples of the product kernel. Cost grows as n^6,
// hence the hard cap; this is a verification oracle, not an estimator.
[[nodiscard]] inline double brute_force_dcov(const PairedSample& sample,
                                             std::size_t max_n = 8) {
  const std::size_t n = sample.size();
  if (n > max_n)
    throw std::domain_error("brute_force_dcov: n = " + std::to_string(n) +
                            " exceeds the cap " + std::to_string(max_n) +
                            "; the full tuple sum costs n^6 kernel evaluations");
  const Eigen::MatrixXd dx = distance_matrix(sample.xs, sample.space_x).values;
  const Eigen::MatrixXd dy = distance_matrix(sample.ys, sample.space_y).values;
  std::array<std::size_t, 6> z{};
  ExactSum total;
  while (true) {
    total.add(six_point_kernel(dx, dy, z));
    std::size_t pos = 0;
    while (pos < 6) {
      if (++z[pos] < n) break;
      z[pos] = 0;
      ++pos;
    }
    if (pos == 6) break;
  }
  const double tuples = std::pow(static_cast<double>(n), 6.0);
  return total.value() / tuples;
}

}  // namespace dcv
