#pragma once

// Empirical distance covariance on metric spaces, V-statistic form.
//
// Pipeline: distance matrices D, double-centered matrices
//   A(i,j) = D(i,j) - rowmean_i - rowmean_j + grandmean,
// the entrywise product Delta = A o B, and
//   dcov = (1/n^2) * sum_ij Delta(i,j).
//
// Summation contract: every reduction here (row means, grand means, the
// Delta total) goes through ExactSum, so each result is the correctly
// rounded value of the exact real sum and does not depend on traversal
// order. Consequences relied on elsewhere: permuting the pairs (x_t, y_t)
// jointly, or relabeling discrete symbols, reproduces dcov bit for bit, and
// dcov equals sum(delta_matrix(...)) / n^2 exactly.

#include <cstddef>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcv/sample.hpp"
#include "dcv/space.hpp"
#include "dcv/sum.hpp"

namespace dcv {

struct DistanceMatrix {
  Eigen::MatrixXd values;  // symmetric, zero diagonal
};

struct CenteredMatrix {
  Eigen::MatrixXd values;
  Eigen::VectorXd row_means;  // row means of the distance matrix
  double grand_mean = 0.0;    // mean distance D(mu_n); >= 0
};

// Entrywise product of two centered matrices; positive semidefinite whenever
// both spaces are of negative type (a Gram matrix, see tensor embedding).
struct DeltaMatrix {
  Eigen::MatrixXd values;
};

struct DcovEstimate {
  std::size_t n = 0;
  double dcov = 0.0;
  double dist_mean_x = 0.0;  // D(mu_n)
  double dist_mean_y = 0.0;  // D(nu_n)
  // dcov / (dist_mean_x * dist_mean_y); defined iff both means are > 0
  double normalized = 0.0;
  bool normalized_defined = false;
  double beta_x = 1.0;
  double beta_y = 1.0;
};

[[nodiscard]] inline DistanceMatrix distance_matrix(std::span<const Point> points,
                                                    const Space& space) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n == 0) throw std::invalid_argument("distance_matrix: empty point list");
  DistanceMatrix out;
  out.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = space.distance(points[static_cast<std::size_t>(i)],
                                      points[static_cast<std::size_t>(j)]);
      out.values(i, j) = d;
      out.values(j, i) = d;
    }
  }
  return out;
}

[[nodiscard]] inline CenteredMatrix double_center(const DistanceMatrix& dist) {
  const Eigen::Index n = dist.values.rows();
  CenteredMatrix out;
  out.row_means.resize(n);
  ExactSum grand;
  for (Eigen::Index i = 0; i < n; ++i) {
    ExactSum row;
    for (Eigen::Index j = 0; j < n; ++j) {
      row.add(dist.values(i, j));
      grand.add(dist.values(i, j));
    }
    out.row_means[i] = row.value() / static_cast<double>(n);
  }
  out.grand_mean = grand.value() / static_cast<double>(n * n);
  out.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.values(i, j) =
          dist.values(i, j) - out.row_means[i] - out.row_means[j] + out.grand_mean;
  return out;
}

[[nodiscard]] inline DeltaMatrix delta_matrix(const CenteredMatrix& a,
                                              const CenteredMatrix& b) {
  if (a.values.rows() != b.values.rows())
    throw std::invalid_argument("delta_matrix: size mismatch");
  DeltaMatrix out;
  out.values = a.values.cwiseProduct(b.values);
  return out;
}

[[nodiscard]] inline double delta_total(const DeltaMatrix& delta) {
  ExactSum s;
  for (Eigen::Index i = 0; i < delta.values.rows(); ++i)
    for (Eigen::Index j = 0; j < delta.values.cols(); ++j) s.add(delta.values(i, j));
  return s.value();
}

namespace detail {

// Shared tail of the estimator once the centered matrices exist.
[[nodiscard]] inline DcovEstimate dcov_from_centered(const CenteredMatrix& a,
                                                     const CenteredMatrix& b,
                                                     const PairedSample& sample) {
  const Eigen::Index n = a.values.rows();
  ExactSum total;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) total.add(a.values(i, j) * b.values(i, j));
  DcovEstimate est;
  est.n = static_cast<std::size_t>(n);
  est.dcov = total.value() / static_cast<double>(n * n);
  est.dist_mean_x = a.grand_mean;
  est.dist_mean_y = b.grand_mean;
  est.beta_x = sample.space_x.beta();
  est.beta_y = sample.space_y.beta();
  est.normalized_defined = a.grand_mean > 0.0 && b.grand_mean > 0.0;
  est.normalized =
      est.normalized_defined ? est.dcov / (a.grand_mean * b.grand_mean) : 0.0;
  return est;
}

}  // namespace detail

[[nodiscard]] inline DcovEstimate dcov(const PairedSample& sample) {
  const DistanceMatrix dx = distance_matrix(sample.xs, sample.space_x);
  const DistanceMatrix dy = distance_matrix(sample.ys, sample.space_y);
  const CenteredMatrix a = double_center(dx);
  const CenteredMatrix b = double_center(dy);
  return detail::dcov_from_centered(a, b, sample);
}

inline constexpr double kDefaultVstatCostCap = 1e8;

// V-statistic of a symmetric-in-law kernel over all n^order index tuples,
// normalized by n^order. The kernel receives a tuple of indices into the
// sample. Refuses when n^order exceeds the cost cap: the full product sum
// grows as n^order and no subsampling shortcut is taken here.
[[nodiscard]] inline double vstat(
    const PairedSample& sample, std::size_t order,
    const std::function<double(std::span<const std::size_t>)>& kernel,
    double cost_cap = kDefaultVstatCostCap) {
  if (order == 0) throw std::invalid_argument("vstat: order must be >= 1");
  const std::size_t n = sample.size();
  const double tuples = std::pow(static_cast<double>(n), static_cast<double>(order));
  if (tuples > cost_cap)
    throw std::domain_error("vstat: n^order = " + std::to_string(tuples) +
                            " exceeds the cost cap " + std::to_string(cost_cap));
  std::vector<std::size_t> idx(order, 0);
  ExactSum total;
  while (true) {
    total.add(kernel(idx));
    std::size_t pos = 0;
    while (pos < order) {
      if (++idx[pos] < n) break;
      idx[pos] = 0;
      ++pos;
    }
    if (pos == order) break;
  }
  return total.value() / tuples;
}

}  // namespace dcv
