#pragma once

// Spectral side of the degenerate limit: the null distribution of n * dcov
// is a weighted sum of squared (possibly correlated) Gaussians, with weights
// the eigenvalues of the Delta integral operator. Empirically the operator
// is discretized Nystrom-style: eigenpairs of (1/n) Delta, score sequences
// sqrt(n) * eigenvector, a Bartlett-kernel long-run covariance of the scores
// capturing serial dependence, and Monte Carlo draws of
//   sum_k lambda_k zeta_k^2,  zeta ~ N(0, Sigma).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dcv/dcov.hpp"
#include "dcv/parallel.hpp"
#include "dcv/rng.hpp"
#include "dcv/sample.hpp"
#include "dcv/sum.hpp"

namespace dcv {

struct TruncationPolicy {
  double trace_fraction = 0.999;
  std::size_t max_components = 100;
};

struct SpectralModel {
  std::size_t n = 0;
  // Full clipped spectrum of (1/n) Delta, descending; only the first `kept`
  // entries carry score rows.
  std::vector<double> eigenvalues;
  Eigen::MatrixXd scores;  // kept x n, row k = sqrt(n) * eigenvector_k
  std::size_t kept = 0;
  double trace_full = 0.0;
};

// Eigendecomposition of (1/n) Delta. Negative eigenvalues are clipped at
// zero; one materially below zero (under -1e-8 relative to the spectral
// radius) signals a non-negative-type space or an upstream bug and throws.
// Kept components: smallest K whose eigenvalues cover trace_fraction of the
// full trace, hard-capped at min(n, max_components).
[[nodiscard]] inline SpectralModel empirical_spectrum(const DeltaMatrix& delta,
                                                      const TruncationPolicy& policy = {}) {
  const Eigen::Index n = delta.values.rows();
  if (n == 0 || delta.values.cols() != n)
    throw std::invalid_argument("empirical_spectrum: square matrix required");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(delta.values /
                                                        static_cast<double>(n));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("empirical_spectrum: eigensolver failed");
  const Eigen::VectorXd& raw = solver.eigenvalues();  // ascending
  const double radius = std::max({raw.maxCoeff(), -raw.minCoeff(), 0.0});
  if (raw.minCoeff() < -1e-8 * radius)
    throw std::runtime_error(
        "empirical_spectrum: materially negative eigenvalue; the product "
        "matrix is not positive semidefinite (non-negative-type space?)");

  SpectralModel model;
  model.n = static_cast<std::size_t>(n);
  model.eigenvalues.resize(static_cast<std::size_t>(n));
  ExactSum trace;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double l = std::max(raw[n - 1 - k], 0.0);
    model.eigenvalues[static_cast<std::size_t>(k)] = l;
    trace.add(l);
  }
  model.trace_full = trace.value();

  const std::size_t cap =
      std::min(static_cast<std::size_t>(n), policy.max_components);
  std::size_t kept = 0;
  if (model.trace_full > 0.0) {
    double acc = 0.0;
    while (kept < cap) {
      acc += model.eigenvalues[kept];
      ++kept;
      if (acc >= policy.trace_fraction * model.trace_full) break;
    }
  }
  model.kept = kept;

  model.scores.resize(static_cast<Eigen::Index>(kept), n);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < kept; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - static_cast<Eigen::Index>(k));
    // canonical sign: the largest-magnitude coordinate is positive
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    model.scores.row(static_cast<Eigen::Index>(k)) = (root_n * v).transpose();
  }
  return model;
}

struct LongRunCovariance {
  Eigen::MatrixXd sigma;  // kept x kept, positive semidefinite
  std::size_t bandwidth = 0;
};

// Bartlett-kernel estimate of the long-run covariance of the score
// sequences: sum over lags |d| <= b of (1 - |d|/(b+1)) times the lag-d
// cross-covariance (1/(n-|d|)) sum_t s_i(t) s_j(t+d), followed by a
// projection onto the positive semidefinite cone (eigenvalue clipping).
// Default bandwidth floor(n^(1/3)). With bandwidth 0 this reduces to the
// lag-0 matrix, the identity up to eigenvector orthonormality rounding.
[[nodiscard]] inline LongRunCovariance long_run_covariance(
    const SpectralModel& model, std::optional<std::size_t> bandwidth = std::nullopt) {
  const std::size_t k = model.kept;
  if (k == 0)
    throw std::invalid_argument("long_run_covariance: model has no kept components");
  const std::size_t n = model.n;
  const std::size_t b =
      bandwidth ? *bandwidth
                : static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n))));
  if (b >= n)
    throw std::invalid_argument("long_run_covariance: bandwidth must be < n");

  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                              static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      CompensatedSum acc;
      for (std::size_t d = 0; d <= b; ++d) {
        const double w = 1.0 - static_cast<double>(d) / static_cast<double>(b + 1);
        CompensatedSum lag_ij;
        for (std::size_t t = 0; t + d < n; ++t)
          lag_ij.add(model.scores(static_cast<Eigen::Index>(i),
                                  static_cast<Eigen::Index>(t)) *
                     model.scores(static_cast<Eigen::Index>(j),
                                  static_cast<Eigen::Index>(t + d)));
        double term = lag_ij.value() / static_cast<double>(n - d);
        if (d > 0) {
          CompensatedSum lag_ji;
          for (std::size_t t = 0; t + d < n; ++t)
            lag_ji.add(model.scores(static_cast<Eigen::Index>(j),
                                    static_cast<Eigen::Index>(t)) *
                       model.scores(static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(t + d)));
          term += lag_ji.value() / static_cast<double>(n - d);
        }
        acc.add(w * term);
      }
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc.value();
    }
  raw = 0.5 * (raw + raw.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(raw);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("long_run_covariance: eigensolver failed");
  const Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(0.0);
  LongRunCovariance out;
  out.sigma = solver.eigenvectors() * clipped.asDiagonal() *
              solver.eigenvectors().transpose();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.bandwidth = b;
  return out;
}

struct NullSample {
  std::vector<double> draws;  // non-negative
  std::uint64_t seed = 0;
};

// Monte Carlo draws of sum_k lambda_k zeta_k^2 with zeta ~ N(0, sigma).
// Draw r uses the stream derive_stream(seed, r), so the sample is identical
// for any thread count.
[[nodiscard]] inline NullSample simulate_null(const SpectralModel& model,
                                              const LongRunCovariance& lrc,
                                              std::size_t reps, std::uint64_t seed,
                                              int threads = 1) {
  if (reps == 0) throw std::invalid_argument("simulate_null: reps must be >= 1");
  const std::size_t k = model.kept;
  if (static_cast<std::size_t>(lrc.sigma.rows()) != k ||
      static_cast<std::size_t>(lrc.sigma.cols()) != k)
    throw std::invalid_argument("simulate_null: covariance size does not match model");

  Eigen::MatrixXd factor(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  if (k > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lrc.sigma);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("simulate_null: eigensolver failed");
    const double radius = std::max({solver.eigenvalues().maxCoeff(),
                                    -solver.eigenvalues().minCoeff(), 0.0});
    if (solver.eigenvalues().minCoeff() < -1e-8 * radius)
      throw std::invalid_argument("simulate_null: covariance is not positive semidefinite");
    factor = solver.eigenvectors() *
             solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  NullSample out;
  out.seed = seed;
  out.draws.assign(reps, 0.0);
  parallel_for(reps, threads, [&](std::size_t r) {
    if (k == 0) return;
    Rng rng(derive_stream(seed, r));
    Eigen::VectorXd g(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
    const Eigen::VectorXd zeta = factor * g;
    CompensatedSum acc;
    for (std::size_t i = 0; i < k; ++i)
      acc.add(model.eigenvalues[i] * zeta[static_cast<Eigen::Index>(i)] *
              zeta[static_cast<Eigen::Index>(i)]);
    out.draws[r] = acc.value();
  });
  return out;
}

struct TraceIdentityReport {
  double trace = 0.0;    // (1/n) sum_i Delta(i, i)
  double product = 0.0;  // D(mu_n) * D(nu_n)
  double gap = 0.0;
};

// Under independent sampling (1/n) trace(Delta) converges to the product of
// the mean distances; the gap is a cheap sanity diagnostic.
[[nodiscard]] inline TraceIdentityReport trace_identity_check(const PairedSample& sample) {
  const CenteredMatrix a = double_center(distance_matrix(sample.xs, sample.space_x));
  const CenteredMatrix b = double_center(distance_matrix(sample.ys, sample.space_y));
  const Eigen::Index n = a.values.rows();
  ExactSum diag;
  for (Eigen::Index i = 0; i < n; ++i) diag.add(a.values(i, i) * b.values(i, i));
  TraceIdentityReport rep;
  rep.trace = diag.value() / static_cast<double>(n);
  rep.product = a.grand_mean * b.grand_mean;
  rep.gap = std::fabs(rep.trace - rep.product);
  return rep;
}

}  // namespace dcv
