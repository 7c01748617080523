#include "dcv/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "dcv/dcov.hpp"
#include "dcv/processes.hpp"
#include "dcv/rng.hpp"
#include "dcv/stats.hpp"

namespace {

using dcv::PairedSample;
using dcv::Point;
using dcv::Space;

PairedSample iid_gaussian_pair(std::size_t n, double rho, std::uint64_t seed) {
  dcv::GaussianCopulaSpec cop;
  cop.rho = rho;
  const dcv::ProcessSpec spec{cop, Space::euclidean(1), Space::euclidean(1)};
  return dcv::simulate(spec, n, seed);
}

PairedSample coupled_discrete(std::size_t n, std::uint64_t seed) {
  dcv::Rng rng(seed);
  std::vector<Point> xs;
  std::vector<Point> ys;
  for (std::size_t t = 0; t < n; ++t) {
    const std::int64_t v = static_cast<std::int64_t>(rng.below(2));
    xs.push_back(Point::symbol(v));
    ys.push_back(Point::symbol(rng.uniform01() < 0.9 ? v : 1 - v));
  }
  return PairedSample(std::move(xs), std::move(ys), Space::discrete(2),
                      Space::discrete(2));
}

TEST(AddOnePValue, CountsTiesAsExtreme) {
  const std::vector<double> draws{0.5, 1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(dcv::add_one_p_value(2.0, draws), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(dcv::add_one_p_value(10.0, draws), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(dcv::add_one_p_value(0.0, draws), 1.0);
}

TEST(SpectralTest, StatisticIsNTimesDcov) {
  const auto sample = iid_gaussian_pair(50, 0.0, 301);
  const auto res = dcv::spectral_test(sample, 17);
  EXPECT_EQ(res.statistic, 50.0 * dcv::dcov(sample).dcov);
  EXPECT_EQ(res.n, 50u);
  EXPECT_EQ(res.reps, 199u);
  EXPECT_EQ(res.seed, 17u);
  ASSERT_EQ(res.null_draws.size(), 199u);
  EXPECT_EQ(res.p_value, dcv::add_one_p_value(res.statistic, res.null_draws));
  EXPECT_FALSE(res.degenerate);
  ASSERT_TRUE(res.bandwidth.has_value());
  EXPECT_EQ(*res.bandwidth, 3u);  // floor(50^(1/3))
}

TEST(SpectralTest, DeterministicAcrossThreadCounts) {
  const auto sample = iid_gaussian_pair(60, 0.0, 302);
  dcv::SpectralTestOptions one;
  one.threads = 1;
  dcv::SpectralTestOptions four;
  four.threads = 4;
  const auto a = dcv::spectral_test(sample, 5, one);
  const auto b = dcv::spectral_test(sample, 5, four);
  EXPECT_EQ(a.p_value, b.p_value);
  for (std::size_t i = 0; i < a.null_draws.size(); ++i)
    EXPECT_EQ(a.null_draws[i], b.null_draws[i]);
}

TEST(SpectralTest, DegenerateSpectrumGivesPOne) {
  std::vector<Point> xs;
  std::vector<Point> ys;
  for (int t = 0; t < 20; ++t) {
    xs.push_back(Point::real(static_cast<double>(t)));
    ys.push_back(Point::symbol(1));  // constant side
  }
  const PairedSample sample(xs, ys, Space::euclidean(1), Space::discrete(3));
  const auto res = dcv::spectral_test(sample, 3);
  EXPECT_TRUE(res.degenerate);
  EXPECT_EQ(res.statistic, 0.0);
  EXPECT_EQ(res.p_value, 1.0);
  for (double d : res.null_draws) EXPECT_EQ(d, 0.0);
}

TEST(SpectralTest, ValidatesArguments) {
  const auto tiny = iid_gaussian_pair(9, 0.0, 303);
  EXPECT_THROW(dcv::spectral_test(tiny, 1), std::invalid_argument);
  const auto ok = iid_gaussian_pair(20, 0.0, 304);
  dcv::SpectralTestOptions zero;
  zero.reps = 0;
  EXPECT_THROW(dcv::spectral_test(ok, 1, zero), std::invalid_argument);
}

TEST(SpectralTest, RejectsStrongDependence) {
  const auto sample = coupled_discrete(100, 305);
  const auto res = dcv::spectral_test(sample, 7);
  EXPECT_LE(res.p_value, 0.01);
}

TEST(BlockBootstrap, PairedRotationReproducesTheStatistic) {
  // With one shared index stream and block length n every resample is a
  // joint circular rotation, which leaves n * dcov invariant up to rounding.
  const auto sample = coupled_discrete(40, 306);
  dcv::BootstrapTestOptions opt;
  opt.reps = 50;
  opt.block_length = 40;
  opt.paired_streams = true;
  const auto res = dcv::block_bootstrap_test(sample, 11, opt);
  const double scale = std::max(1.0, std::fabs(res.statistic));
  for (double d : res.null_draws)
    EXPECT_NEAR(d, res.statistic, 1e-10 * scale);
}

TEST(BlockBootstrap, DefaultBlockLengthIsCubeRoot) {
  const auto sample = iid_gaussian_pair(100, 0.0, 307);
  dcv::BootstrapTestOptions opt;
  opt.reps = 5;
  const auto res = dcv::block_bootstrap_test(sample, 1, opt);
  ASSERT_TRUE(res.block_length.has_value());
  EXPECT_EQ(*res.block_length, 4u);
}

TEST(BlockBootstrap, DeterministicAcrossThreadCounts) {
  const auto sample = iid_gaussian_pair(50, 0.3, 308);
  dcv::BootstrapTestOptions one;
  one.reps = 60;
  one.threads = 1;
  dcv::BootstrapTestOptions three = one;
  three.threads = 3;
  const auto a = dcv::block_bootstrap_test(sample, 9, one);
  const auto b = dcv::block_bootstrap_test(sample, 9, three);
  for (std::size_t i = 0; i < a.null_draws.size(); ++i)
    EXPECT_EQ(a.null_draws[i], b.null_draws[i]);
  EXPECT_EQ(a.p_value, b.p_value);
}

TEST(BlockBootstrap, ValidatesArguments) {
  const auto sample = iid_gaussian_pair(30, 0.0, 309);
  dcv::BootstrapTestOptions zero;
  zero.reps = 0;
  EXPECT_THROW(dcv::block_bootstrap_test(sample, 1, zero), std::invalid_argument);
  dcv::BootstrapTestOptions huge;
  huge.block_length = 31;
  EXPECT_THROW(dcv::block_bootstrap_test(sample, 1, huge), std::invalid_argument);
}

TEST(BlockBootstrap, LengthOneMatchesPermutationNull) {
  // Distribution-level agreement on iid data: block length 1 resampling
  // and the permutation group should produce nearly the same null at
  // moderate n. Kolmogorov-Smirnov distance between the two draw sets,
  // median over seeds, stays under 0.05.
  std::vector<double> ks;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sample = iid_gaussian_pair(200, 0.0, 400 + seed);
    dcv::BootstrapTestOptions bopt;
    bopt.reps = 2000;
    bopt.block_length = 1;
    const auto boot = dcv::block_bootstrap_test(sample, 1000 + seed, bopt);
    dcv::PermutationTestOptions popt;
    popt.reps = 2000;
    const auto perm = dcv::permutation_test(sample, 2000 + seed, popt);
    ks.push_back(dcv::ks_distance(boot.null_draws, perm.null_draws));
  }
  EXPECT_LT(dcv::median(ks), 0.05);
}

TEST(PermutationTest, ExactModeEnumeratesTheFullGroup) {
  const auto sample = coupled_discrete(5, 310);
  dcv::PermutationTestOptions opt;
  opt.exact = true;
  const auto res = dcv::permutation_test(sample, 1, opt);
  EXPECT_TRUE(res.exact);
  EXPECT_EQ(res.reps, 120u);  // 5!
  EXPECT_EQ(res.null_draws.size(), 120u);
  // p = count / n!; the identity permutation always counts.
  EXPECT_GE(res.p_value, 1.0 / 120.0);
  std::size_t count = 0;
  for (double d : res.null_draws)
    if (d >= res.statistic - 1e-12) ++count;
  EXPECT_NEAR(res.p_value, static_cast<double>(count) / 120.0, 1e-9);
}

TEST(PermutationTest, ExactModeTwoPoints) {
  // n = 2: the swap reproduces the same distance matrices, so both
  // permutations tie and p = 1.
  const PairedSample sample({Point::real(0.0), Point::real(1.0)},
                            {Point::real(0.0), Point::real(2.0)},
                            Space::euclidean(1), Space::euclidean(1));
  dcv::PermutationTestOptions opt;
  opt.exact = true;
  const auto res = dcv::permutation_test(sample, 1, opt);
  EXPECT_EQ(res.reps, 2u);
  EXPECT_TRUE(res.p_value == 0.5 || res.p_value == 1.0);
  EXPECT_EQ(res.p_value, 1.0);
}

TEST(PermutationTest, ExactModeRefusesLargeGroups) {
  const auto sample = coupled_discrete(8, 311);  // 8! = 40320 > 5040
  dcv::PermutationTestOptions opt;
  opt.exact = true;
  EXPECT_THROW(dcv::permutation_test(sample, 1, opt), std::domain_error);
}

TEST(PermutationTest, DrawsMatchDirectRecomputation) {
  // Gathering from the centered matrix is exact: each null draw equals
  // n * dcov of the sample with ys physically permuted.
  const auto sample = coupled_discrete(25, 312);
  dcv::PermutationTestOptions opt;
  opt.reps = 10;
  const auto res = dcv::permutation_test(sample, 77, opt);
  for (std::size_t r = 0; r < opt.reps; ++r) {
    dcv::Rng rng(dcv::derive_stream(77, r));
    std::vector<std::size_t> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<Point> ys;
    for (std::size_t i = 0; i < 25; ++i) ys.push_back(sample.ys[perm[i]]);
    const auto direct =
        dcv::dcov(PairedSample(sample.xs, ys, sample.space_x, sample.space_y));
    EXPECT_NEAR(res.null_draws[r], 25.0 * direct.dcov,
                1e-10 * std::max(1.0, std::fabs(res.null_draws[r])));
  }
}

TEST(PermutationTest, DeterministicAcrossThreadCounts) {
  const auto sample = coupled_discrete(30, 313);
  dcv::PermutationTestOptions one;
  one.reps = 40;
  one.threads = 1;
  dcv::PermutationTestOptions four = one;
  four.threads = 4;
  const auto a = dcv::permutation_test(sample, 3, one);
  const auto b = dcv::permutation_test(sample, 3, four);
  for (std::size_t i = 0; i < a.null_draws.size(); ++i)
    EXPECT_EQ(a.null_draws[i], b.null_draws[i]);
}

TEST(AllTests, DetectStrongDependence) {
  const auto sample = coupled_discrete(60, 314);
  EXPECT_LE(dcv::spectral_test(sample, 1).p_value, 0.05);
  EXPECT_LE(dcv::block_bootstrap_test(sample, 2).p_value, 0.05);
  EXPECT_LE(dcv::permutation_test(sample, 3).p_value, 0.05);
}

TEST(AllTests, AcceptIndependentData) {
  // Single fixed seed per method; just check none of them misfires at the
  // 1% level on a clearly independent sample.
  const auto sample = iid_gaussian_pair(120, 0.0, 315);
  EXPECT_GT(dcv::spectral_test(sample, 4).p_value, 0.01);
  EXPECT_GT(dcv::block_bootstrap_test(sample, 5).p_value, 0.01);
  EXPECT_GT(dcv::permutation_test(sample, 6).p_value, 0.01);
}

}  // namespace
