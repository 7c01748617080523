#pragma once

// Independence tests built on the statistic n * dcov.
//
// Three null routes: the spectral asymptotic law (serial dependence absorbed
// by the long-run covariance of the scores), a circular moving-block
// bootstrap that resamples the two series on independent index streams
// (decoupling them under the null while preserving within-series
// dependence), and a permutation null for the iid setting.
//
// Monte Carlo p-values use the add-one rule
//   p = (1 + #{null draw >= statistic}) / (reps + 1),
// so with reps = 199 a 5% test is exact under exchangeability. The exact
// enumeration mode of the permutation test returns the full-group fraction
// #{>= observed}/n! instead (the identity permutation always counts).
//
// Replication r always draws from the stream derive_stream(seed, r): results
// are byte-identical for any thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dcv/dcov.hpp"
#include "dcv/parallel.hpp"
#include "dcv/rng.hpp"
#include "dcv/sample.hpp"
#include "dcv/spectrum.hpp"
#include "dcv/sum.hpp"

namespace dcv {

enum class TestMethod { spectral, block_bootstrap, permutation };

[[nodiscard]] inline const char* to_string(TestMethod m) {
  switch (m) {
    case TestMethod::spectral: return "spectral";
    case TestMethod::block_bootstrap: return "block-bootstrap";
    case TestMethod::permutation: return "permutation";
  }
  return "unknown";
}

struct TestResult {
  TestMethod method = TestMethod::spectral;
  std::size_t n = 0;
  double statistic = 0.0;  // n * dcov of the observed sample
  double p_value = 1.0;
  std::size_t reps = 0;
  std::vector<double> null_draws;
  std::uint64_t seed = 0;
  bool degenerate = false;  // spectral: empty spectrum, statistic 0, p = 1
  bool exact = false;       // permutation: full-group enumeration
  std::optional<std::size_t> bandwidth;
  std::optional<std::size_t> block_length;
};

[[nodiscard]] inline double add_one_p_value(double statistic,
                                            std::span<const double> draws) {
  std::size_t count = 0;
  for (double d : draws)
    if (d >= statistic) ++count;
  return static_cast<double>(1 + count) / static_cast<double>(draws.size() + 1);
}

struct SpectralTestOptions {
  std::size_t reps = 199;
  std::optional<std::size_t> bandwidth;  // default floor(n^(1/3))
  TruncationPolicy truncation{};
  int threads = 1;
};

struct BootstrapTestOptions {
  std::size_t reps = 199;
  std::optional<std::size_t> block_length;  // default max(1, floor(n^(1/3)))
  // Diagnostic mode: one shared index stream for both series. With
  // block_length = n every resample is a joint rotation of the pairs and the
  // statistic is reproduced up to rounding.
  bool paired_streams = false;
  int threads = 1;
};

struct PermutationTestOptions {
  std::size_t reps = 199;
  bool exact = false;  // enumerate all n! permutations (n small)
  double exact_cap = 5040.0;
  int threads = 1;
};

namespace detail {

// Circular moving blocks: stitch ceil(n/L) blocks of length L, uniformly
// random starts, wrap-around indices, truncated to n.
[[nodiscard]] inline std::vector<std::size_t> block_indices(Rng& rng, std::size_t n,
                                                            std::size_t block_length) {
  std::vector<std::size_t> idx;
  idx.reserve(n);
  while (idx.size() < n) {
    const std::size_t start = rng.index(n);
    for (std::size_t o = 0; o < block_length && idx.size() < n; ++o)
      idx.push_back((start + o) % n);
  }
  return idx;
}

// n * dcov of the resample (dx(I), dy(J)): gather raw distances, re-center
// against the resample's own marginals, sum the entrywise product. Plain
// fixed-order reductions; the exact accumulator is reserved for the
// observed statistic.
[[nodiscard]] inline double gathered_stat(const Eigen::MatrixXd& dx,
                                          const Eigen::MatrixXd& dy,
                                          const std::vector<std::size_t>& take_x,
                                          const std::vector<std::size_t>& take_y) {
  const auto n = static_cast<Eigen::Index>(take_x.size());
  Eigen::MatrixXd gx(n, n);
  Eigen::MatrixXd gy(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      gx(i, j) = dx(static_cast<Eigen::Index>(take_x[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(take_x[static_cast<std::size_t>(j)]));
      gy(i, j) = dy(static_cast<Eigen::Index>(take_y[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(take_y[static_cast<std::size_t>(j)]));
    }
  const Eigen::VectorXd rx = gx.rowwise().mean();
  const Eigen::VectorXd ry = gy.rowwise().mean();
  const double gxm = rx.mean();
  const double gym = ry.mean();
  CompensatedSum total;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      total.add((gx(i, j) - rx[i] - rx[j] + gxm) * (gy(i, j) - ry[i] - ry[j] + gym));
  return total.value() / static_cast<double>(n);
}

// n * dcov after permuting the y side. Permuting ys permutes the centered
// matrix B jointly in rows and columns (the marginal law is unchanged), so
// gathering from B is exact, not an approximation.
[[nodiscard]] inline double permuted_stat(const Eigen::MatrixXd& a,
                                          const Eigen::MatrixXd& b,
                                          const std::vector<std::size_t>& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  CompensatedSum total;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto pi = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto pj = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]);
      total.add(a(i, j) * b(pi, pj));
    }
  }
  return total.value() / static_cast<double>(n);
}

}  // namespace detail

// Asymptotic test: statistic n * dcov against Monte Carlo draws from the
// estimated limit law sum_k lambda_k zeta_k^2, zeta ~ N(0, Sigma_hat).
// Requires n >= 10; below that the discretized spectrum is meaningless.
// A sample with an empty spectrum (a constant marginal) is reported as
// degenerate: statistic 0 against an all-zero null, p = 1.
[[nodiscard]] inline TestResult spectral_test(const PairedSample& sample,
                                              std::uint64_t seed,
                                              const SpectralTestOptions& opt = {}) {
  if (sample.size() < 10)
    throw std::invalid_argument("spectral_test: requires n >= 10");
  if (opt.reps == 0) throw std::invalid_argument("spectral_test: reps must be >= 1");
  const CenteredMatrix a = double_center(distance_matrix(sample.xs, sample.space_x));
  const CenteredMatrix b = double_center(distance_matrix(sample.ys, sample.space_y));
  const DcovEstimate est = detail::dcov_from_centered(a, b, sample);

  TestResult result;
  result.method = TestMethod::spectral;
  result.n = sample.size();
  result.statistic = static_cast<double>(sample.size()) * est.dcov;
  result.reps = opt.reps;
  result.seed = seed;

  const SpectralModel model = empirical_spectrum(delta_matrix(a, b), opt.truncation);
  if (model.kept == 0) {
    result.degenerate = true;
    result.null_draws.assign(opt.reps, 0.0);
    result.p_value = add_one_p_value(result.statistic, result.null_draws);
    return result;
  }
  const LongRunCovariance lrc = long_run_covariance(model, opt.bandwidth);
  result.bandwidth = lrc.bandwidth;
  NullSample null = simulate_null(model, lrc, opt.reps, seed, opt.threads);
  result.null_draws = std::move(null.draws);
  result.p_value = add_one_p_value(result.statistic, result.null_draws);
  return result;
}

// Circular moving-block bootstrap. Under the null the two series are
// decoupled by resampling them on independent index streams; block structure
// preserves the within-series dependence the spectral route models
// parametrically.
[[nodiscard]] inline TestResult block_bootstrap_test(const PairedSample& sample,
                                                     std::uint64_t seed,
                                                     const BootstrapTestOptions& opt = {}) {
  if (opt.reps == 0)
    throw std::invalid_argument("block_bootstrap_test: reps must be >= 1");
  const std::size_t n = sample.size();
  const std::size_t block =
      opt.block_length.value_or(std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n))))));
  if (block < 1 || block > n)
    throw std::invalid_argument("block_bootstrap_test: block length must lie in [1, n]");

  const Eigen::MatrixXd dx = distance_matrix(sample.xs, sample.space_x).values;
  const Eigen::MatrixXd dy = distance_matrix(sample.ys, sample.space_y).values;
  const CenteredMatrix a = double_center(DistanceMatrix{dx});
  const CenteredMatrix b = double_center(DistanceMatrix{dy});
  const DcovEstimate est = detail::dcov_from_centered(a, b, sample);

  TestResult result;
  result.method = TestMethod::block_bootstrap;
  result.n = n;
  result.statistic = static_cast<double>(n) * est.dcov;
  result.reps = opt.reps;
  result.seed = seed;
  result.block_length = block;
  result.null_draws.assign(opt.reps, 0.0);

  parallel_for(opt.reps, opt.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_stream(seed, r);
    Rng rng_x(derive_stream(rep_seed, 0));
    const std::vector<std::size_t> ix = detail::block_indices(rng_x, n, block);
    std::vector<std::size_t> iy;
    if (opt.paired_streams) {
      iy = ix;
    } else {
      Rng rng_y(derive_stream(rep_seed, 1));
      iy = detail::block_indices(rng_y, n, block);
    }
    result.null_draws[r] = detail::gathered_stat(dx, dy, ix, iy);
  });
  result.p_value = add_one_p_value(result.statistic, result.null_draws);
  return result;
}

// Permutation test: ys are permuted against xs. Valid for iid samples;
// serial dependence breaks the exchangeability assumption, so callers
// simulating from a dependent process should prefer the other two routes.
[[nodiscard]] inline TestResult permutation_test(const PairedSample& sample,
                                                 std::uint64_t seed,
                                                 const PermutationTestOptions& opt = {}) {
  const std::size_t n = sample.size();
  const CenteredMatrix a = double_center(distance_matrix(sample.xs, sample.space_x));
  const CenteredMatrix b = double_center(distance_matrix(sample.ys, sample.space_y));
  const DcovEstimate est = detail::dcov_from_centered(a, b, sample);

  TestResult result;
  result.method = TestMethod::permutation;
  result.n = n;
  result.statistic = static_cast<double>(n) * est.dcov;
  result.seed = seed;

  if (opt.exact) {
    double total = 1.0;
    for (std::size_t i = 2; i <= n; ++i) total *= static_cast<double>(i);
    if (total > opt.exact_cap)
      throw std::domain_error(
          "permutation_test: n! exceeds the exact-enumeration cap");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    // all comparisons run through the same gather route, so the identity
    // permutation matches the observed value exactly
    const double observed = detail::permuted_stat(a.values, b.values, perm);
    std::size_t count = 0;
    std::size_t enumerated = 0;
    result.exact = true;
    do {
      const double stat = detail::permuted_stat(a.values, b.values, perm);
      result.null_draws.push_back(stat);
      if (stat >= observed) ++count;
      ++enumerated;
    } while (std::next_permutation(perm.begin(), perm.end()));
    result.reps = enumerated;
    result.p_value = static_cast<double>(count) / static_cast<double>(enumerated);
    return result;
  }

  if (opt.reps == 0) throw std::invalid_argument("permutation_test: reps must be >= 1");
  result.reps = opt.reps;
  result.null_draws.assign(opt.reps, 0.0);
  parallel_for(opt.reps, opt.threads, [&](std::size_t r) {
    Rng rng(derive_stream(seed, r));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    result.null_draws[r] = detail::permuted_stat(a.values, b.values, perm);
  });
  result.p_value = add_one_p_value(result.statistic, result.null_draws);
  return result;
}

}  // namespace dcv
