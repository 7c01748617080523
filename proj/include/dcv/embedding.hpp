#pragma once

// Hilbert-space embeddings realizing a distance as a squared norm:
// d(p, q) = |phi(p) - phi(q)|^2.
//
// Two constructions: the canonical embedding of the discrete metric
// (symbol s -> e_s / sqrt(2)), and the classical multidimensional-scaling
// embedding of an arbitrary finite negative-type configuration from the
// spectral factorization of -1/2 J D J.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dcv/space.hpp"

namespace dcv {

struct Embedding {
  Eigen::Index dim = 0;
  std::function<Eigen::VectorXd(const Point&)> map;
  // Bochner mean subtracted by centered(); zero vector until recentered.
  Eigen::VectorXd center;

  [[nodiscard]] Eigen::VectorXd image(const Point& p) const { return map(p); }
  [[nodiscard]] Eigen::VectorXd centered(const Point& p) const { return map(p) - center; }
};

// phi(s) = e_s / sqrt(2), so |phi(s) - phi(t)|^2 is 0 or 1 exactly matching
// the discrete metric. Requires beta == 1 (other exponents change nothing on
// a 0/1 metric but would make the identity claim misleading).
[[nodiscard]] inline Embedding discrete_embedding(const Space& space) {
  if (space.kind() != SpaceKind::discrete)
    throw std::invalid_argument("discrete_embedding: requires a discrete space");
  const auto m = space.alphabet();
  Embedding e;
  e.dim = static_cast<Eigen::Index>(m);
  e.center = Eigen::VectorXd::Zero(e.dim);
  e.map = [m](const Point& p) {
    const auto s = p.sym();
    if (s < 0 || s >= m)
      throw std::invalid_argument("discrete_embedding: symbol out of range");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    v[static_cast<Eigen::Index>(s)] = 1.0 / std::sqrt(2.0);
    return v;
  };
  return e;
}

// Returns a copy whose center is the mean image over the given points.
[[nodiscard]] inline Embedding centered_embedding(Embedding e,
                                                  std::span<const Point> points) {
  if (points.empty())
    throw std::invalid_argument("centered_embedding: empty point list");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(e.dim);
  for (const auto& p : points) mean += e.map(p);
  e.center = mean / static_cast<double>(points.size());
  return e;
}

// Rows are the centered images of the given points.
[[nodiscard]] inline Eigen::MatrixXd embedding_images(const Embedding& e,
                                                      std::span<const Point> points) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), e.dim);
  for (std::size_t i = 0; i < points.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = e.centered(points[i]).transpose();
  return out;
}

// Classical MDS: given a symmetric zero-diagonal distance matrix D of
// negative type, returns row vectors phi_i with |phi_i - phi_j|^2 = D(i, j).
// The Gram matrix -1/2 J D J (J the centering projector) is factorized; a
// materially negative eigenvalue (below -1e-10 * lambda_max) means the
// configuration is not of negative type and throws.
[[nodiscard]] inline Eigen::MatrixXd configuration_embedding(const Eigen::MatrixXd& D) {
  const Eigen::Index n = D.rows();
  if (n == 0 || D.cols() != n)
    throw std::invalid_argument("configuration_embedding: square matrix required");
  const Eigen::MatrixXd J =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd G = -0.5 * (J * D * J);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("configuration_embedding: eigensolver failed");
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const double lmax = std::max(lambda.maxCoeff(), 0.0);
  Eigen::MatrixXd phi(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double l = lambda[k];
    if (l < -1e-10 * std::max(lmax, 1.0))
      throw std::runtime_error(
          "configuration_embedding: configuration is not of negative type");
    if (l < 0.0) l = 0.0;
    phi.col(k) = solver.eigenvectors().col(k) * std::sqrt(l);
  }
  return phi;
}

}  // namespace dcv
