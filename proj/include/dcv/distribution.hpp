#pragma once

// Finitely supported joint distributions: exact population distance
// covariance and exact Hoeffding projections of the 6-point product kernel,
// both by exhaustive summation over the support. These are the independent
// reference values the sampling-based code is tested against.

#include <cstddef>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dcv/oracle.hpp"
#include "dcv/sample.hpp"
#include "dcv/space.hpp"
#include "dcv/sum.hpp"

namespace dcv {

struct DiscreteJointDistribution {
  std::vector<Point> xs;  // aligned support atoms (x_i, y_i)
  std::vector<Point> ys;
  std::vector<double> weights;
  Space space_x;
  Space space_y;

  DiscreteJointDistribution(std::vector<Point> xs_in, std::vector<Point> ys_in,
                            std::vector<double> w, Space sx, Space sy)
      : xs(std::move(xs_in)),
        ys(std::move(ys_in)),
        weights(std::move(w)),
        space_x(std::move(sx)),
        space_y(std::move(sy)) {
    if (xs.size() != ys.size() || xs.size() != weights.size())
      throw std::invalid_argument("DiscreteJointDistribution: misaligned atom lists");
    if (xs.empty())
      throw std::invalid_argument("DiscreteJointDistribution: empty support");
    ExactSum total;
    for (double w_i : weights) {
      if (w_i < 0.0)
        throw std::invalid_argument("DiscreteJointDistribution: negative weight");
      total.add(w_i);
    }
    if (std::fabs(total.value() - 1.0) > 1e-12)
      throw std::invalid_argument("DiscreteJointDistribution: weights must sum to 1");
    for (const auto& p : xs) space_x.check_point(p);
    for (const auto& p : ys) space_y.check_point(p);
  }

  [[nodiscard]] std::size_t support_size() const { return xs.size(); }
};

// theta = mu (x) nu from the two marginals.
[[nodiscard]] inline DiscreteJointDistribution product_measure(
    std::span<const Point> atoms_x, std::span<const double> wx,
    std::span<const Point> atoms_y, std::span<const double> wy, Space sx, Space sy) {
  if (atoms_x.size() != wx.size() || atoms_y.size() != wy.size())
    throw std::invalid_argument("product_measure: misaligned marginals");
  std::vector<Point> xs;
  std::vector<Point> ys;
  std::vector<double> w;
  for (std::size_t i = 0; i < atoms_x.size(); ++i)
    for (std::size_t j = 0; j < atoms_y.size(); ++j) {
      xs.push_back(atoms_x[i]);
      ys.push_back(atoms_y[j]);
      w.push_back(wx[i] * wy[j]);
    }
  return DiscreteJointDistribution(std::move(xs), std::move(ys), std::move(w),
                                   std::move(sx), std::move(sy));
}

// Empirical measure of a symbol-valued sample as a distribution with one
// atom per distinct pair. dcov of the sample equals population_dcov of this
// measure, which gives an O(n + S^2) route for large discrete samples.
[[nodiscard]] inline DiscreteJointDistribution empirical_distribution(
    const PairedSample& sample) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> counts;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    if (!sample.xs[t].is_symbol() || !sample.ys[t].is_symbol())
      throw std::invalid_argument(
          "empirical_distribution: requires symbol payloads on both sides");
    ++counts[{sample.xs[t].sym(), sample.ys[t].sym()}];
  }
  std::vector<Point> xs;
  std::vector<Point> ys;
  std::vector<double> w;
  for (const auto& [pair, count] : counts) {
    xs.push_back(Point::symbol(pair.first));
    ys.push_back(Point::symbol(pair.second));
    w.push_back(static_cast<double>(count) / static_cast<double>(sample.size()));
  }
  return DiscreteJointDistribution(std::move(xs), std::move(ys), std::move(w),
                                   sample.space_x, sample.space_y);
}

// Exact population dcov of a finitely supported law, delta form:
// sum_ij w_i w_j d_mu(i,j) d_nu(i,j) with d_mu the doubly centered distance.
[[nodiscard]] inline double population_dcov(const DiscreteJointDistribution& theta,
                                            std::size_t support_cap = 4096) {
  const std::size_t s = theta.support_size();
  if (s > support_cap)
    throw std::domain_error("population_dcov: support size " + std::to_string(s) +
                            " exceeds the cap " + std::to_string(support_cap));
  const Eigen::MatrixXd dx = distance_matrix(theta.xs, theta.space_x).values;
  const Eigen::MatrixXd dy = distance_matrix(theta.ys, theta.space_y).values;
  const auto sn = static_cast<Eigen::Index>(s);
  Eigen::VectorXd ax(sn);
  Eigen::VectorXd ay(sn);
  for (Eigen::Index i = 0; i < sn; ++i) {
    ExactSum sx;
    ExactSum sy;
    for (Eigen::Index j = 0; j < sn; ++j) {
      sx.add(theta.weights[static_cast<std::size_t>(j)] * dx(i, j));
      sy.add(theta.weights[static_cast<std::size_t>(j)] * dy(i, j));
    }
    ax[i] = sx.value();
    ay[i] = sy.value();
  }
  ExactSum gx;
  ExactSum gy;
  for (Eigen::Index i = 0; i < sn; ++i) {
    gx.add(theta.weights[static_cast<std::size_t>(i)] * ax[i]);
    gy.add(theta.weights[static_cast<std::size_t>(i)] * ay[i]);
  }
  const double dmu_bar = gx.value();
  const double dnu_bar = gy.value();
  ExactSum total;
  for (Eigen::Index i = 0; i < sn; ++i)
    for (Eigen::Index j = 0; j < sn; ++j) {
      const double dmu = dx(i, j) - ax[i] - ax[j] + dmu_bar;
      const double dnu = dy(i, j) - ay[i] - ay[j] + dnu_bar;
      total.add(theta.weights[static_cast<std::size_t>(i)] *
                theta.weights[static_cast<std::size_t>(j)] * dmu * dnu);
    }
  return total.value();
}

namespace detail {

// Exhaustive conditional expectation of the symmetrized 6-point kernel with
// k arguments pinned: the 720 argument permutations group by the injection
// sending pinned arguments to kernel positions, each carrying weight
// (6-k)!/720; the free positions are integrated over the support.
class HoeffdingEvaluator {
 public:
  HoeffdingEvaluator(const DiscreteJointDistribution& theta,
                     std::span<const std::pair<Point, Point>> args)
      : theta_(theta), support_(theta.support_size()), pinned_(args.size()) {
    std::vector<Point> all_x(theta.xs.begin(), theta.xs.end());
    std::vector<Point> all_y(theta.ys.begin(), theta.ys.end());
    for (const auto& [px, py] : args) {
      theta.space_x.check_point(px);
      theta.space_y.check_point(py);
      all_x.push_back(px);
      all_y.push_back(py);
    }
    dx_ = distance_matrix(all_x, theta.space_x).values;
    dy_ = distance_matrix(all_y, theta.space_y).values;
  }

  // g_|subset|(args restricted to subset); subset is a bitmask over args.
  [[nodiscard]] double g(unsigned subset) const {
    std::vector<std::size_t> pinned;  // extended-table ids of pinned points
    for (std::size_t a = 0; a < pinned_; ++a)
      if (subset & (1u << a)) pinned.push_back(support_ + a);
    const std::size_t k = pinned.size();
    ExactSum total;
    std::array<bool, 6> used{};
    std::array<std::size_t, 6> slot{};
    enumerate_injections(pinned, 0, used, slot, total);
    const double scale = factorial(6 - k) / 720.0;
    return total.value() * scale;
  }

  [[nodiscard]] double cost(unsigned subset) const {
    std::size_t k = 0;
    for (std::size_t a = 0; a < pinned_; ++a)
      if (subset & (1u << a)) ++k;
    return injection_count(k) *
           std::pow(static_cast<double>(support_), static_cast<double>(6 - k));
  }

 private:
  static double factorial(std::size_t m) {
    double f = 1.0;
    for (std::size_t i = 2; i <= m; ++i) f *= static_cast<double>(i);
    return f;
  }

  static double injection_count(std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) c *= static_cast<double>(6 - i);
    return c;
  }

  void enumerate_injections(const std::vector<std::size_t>& pinned, std::size_t depth,
                            std::array<bool, 6>& used, std::array<std::size_t, 6>& slot,
                            ExactSum& total) const {
    if (depth == pinned.size()) {
      integrate_free(pinned.size(), used, slot, total);
      return;
    }
    for (std::size_t pos = 0; pos < 6; ++pos) {
      if (used[pos]) continue;
      used[pos] = true;
      slot[pos] = pinned[depth];
      enumerate_injections(pinned, depth + 1, used, slot, total);
      used[pos] = false;
    }
  }

  void integrate_free(std::size_t k, const std::array<bool, 6>& used,
                      std::array<std::size_t, 6>& slot, ExactSum& total) const {
    std::vector<std::size_t> free_positions;
    for (std::size_t pos = 0; pos < 6; ++pos)
      if (!used[pos]) free_positions.push_back(pos);
    const std::size_t m = free_positions.size();
    std::vector<std::size_t> u(m, 0);
    while (true) {
      double w = 1.0;
      for (std::size_t r = 0; r < m; ++r) {
        slot[free_positions[r]] = u[r];
        w *= theta_.weights[u[r]];
      }
      total.add(w * six_point_kernel(dx_, dy_, slot));
      if (m == 0) break;
      std::size_t pos = 0;
      while (pos < m) {
        if (++u[pos] < support_) break;
        u[pos] = 0;
        ++pos;
      }
      if (pos == m) break;
    }
    (void)k;
  }

  const DiscreteJointDistribution& theta_;
  std::size_t support_;
  std::size_t pinned_;
  Eigen::MatrixXd dx_;
  Eigen::MatrixXd dy_;
};

}  // namespace detail

inline constexpr double kDefaultHoeffdingCostCap = 5e7;

// Exact canonical Hoeffding projection of the 6-point product kernel under
// theta, evaluated at c fixed argument pairs:
//   hbar_c(z_1..z_c) = sum over subsets B of {1..c} of (-1)^(c-|B|) g_|B|(z_B),
// g_k the conditional expectation of the symmetrized kernel given k
// arguments. c = 0 returns the full expectation, i.e. population dcov.
// Refuses when the exhaustive integration would exceed the cost cap.
[[nodiscard]] inline double hoeffding_component(
    std::size_t c, const DiscreteJointDistribution& theta,
    std::span<const std::pair<Point, Point>> args,
    double cost_cap = kDefaultHoeffdingCostCap) {
  if (c > 6)
    throw std::invalid_argument("hoeffding_component: order must be <= 6");
  if (args.size() != c)
    throw std::invalid_argument("hoeffding_component: need exactly c argument pairs");
  detail::HoeffdingEvaluator eval(theta, args);
  double cost = 0.0;
  for (unsigned subset = 0; subset < (1u << c); ++subset) cost += eval.cost(subset);
  if (cost > cost_cap)
    throw std::domain_error("hoeffding_component: exhaustive cost " +
                            std::to_string(cost) + " exceeds the cap " +
                            std::to_string(cost_cap));
  ExactSum total;
  for (unsigned subset = 0; subset < (1u << c); ++subset) {
    std::size_t bits = 0;
    for (std::size_t a = 0; a < c; ++a)
      if (subset & (1u << a)) ++bits;
    const double sign = ((c - bits) % 2 == 0) ? 1.0 : -1.0;
    total.add(sign * eval.g(subset));
  }
  return total.value();
}

}  // namespace dcv
