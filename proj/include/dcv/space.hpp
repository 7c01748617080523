#pragma once

// Metric and pseudometric sample spaces.
//
// A Space is a base metric together with an exponent beta in (0, 2]; the
// effective distance is base(p, q)^beta. For beta <= 1 the result is again a
// metric. For beta in (1, 2] only the weak triangle inequality
//   d(x, x') <= 2^(beta-1) * (d(x, x0) + d(x0, x'))
// survives, which is all the estimator needs. Built-in kinds are of negative
// type for every beta in (0, 2]: distances embed as squared Hilbert norms.
// User-defined metrics are accepted as callbacks; metric axioms, negative
// type and separability of the underlying space are then the caller's
// responsibility (validate_space spot-checks the axioms on data).

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Dense>

#include "dcv/rng.hpp"

namespace dcv {

enum class SpaceKind { euclidean, discrete, hilbert_l2, user_defined };

[[nodiscard]] inline const char* to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::euclidean: return "euclidean";
    case SpaceKind::discrete: return "discrete";
    case SpaceKind::hilbert_l2: return "hilbert_l2";
    case SpaceKind::user_defined: return "user_defined";
  }
  return "unknown";
}

// A sample point: either a coordinate vector or a categorical symbol.
struct Point {
  std::variant<Eigen::VectorXd, std::int64_t> payload;

  [[nodiscard]] static Point vector(Eigen::VectorXd v) { return Point{std::move(v)}; }
  [[nodiscard]] static Point vector(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return Point{std::move(v)};
  }
  [[nodiscard]] static Point real(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return Point{std::move(v)};
  }
  [[nodiscard]] static Point symbol(std::int64_t s) { return Point{s}; }

  [[nodiscard]] bool is_vector() const {
    return std::holds_alternative<Eigen::VectorXd>(payload);
  }
  [[nodiscard]] bool is_symbol() const { return !is_vector(); }

  [[nodiscard]] const Eigen::VectorXd& vec() const {
    if (!is_vector()) throw std::invalid_argument("Point: expected a vector payload");
    return std::get<Eigen::VectorXd>(payload);
  }
  [[nodiscard]] std::int64_t sym() const {
    if (!is_symbol()) throw std::invalid_argument("Point: expected a symbol payload");
    return std::get<std::int64_t>(payload);
  }
};

[[nodiscard]] inline bool same_point(const Point& a, const Point& b) {
  if (a.is_symbol() != b.is_symbol()) return false;
  if (a.is_symbol()) return a.sym() == b.sym();
  const auto& u = a.vec();
  const auto& v = b.vec();
  return u.size() == v.size() && u == v;
}

class Space {
 public:
  using Metric = std::function<double(const Point&, const Point&)>;

  [[nodiscard]] static Space euclidean(Eigen::Index dim, double beta = 1.0) {
    if (dim < 1) throw std::invalid_argument("Space::euclidean: dim must be >= 1");
    return Space(SpaceKind::euclidean, beta, dim, 0, "euclidean", nullptr);
  }

  [[nodiscard]] static Space discrete(std::int64_t alphabet, double beta = 1.0) {
    if (alphabet < 1) throw std::invalid_argument("Space::discrete: alphabet must be >= 1");
    return Space(SpaceKind::discrete, beta, 0, alphabet, "discrete", nullptr);
  }

  // Finite-dimensional slice of l2; numerically a Euclidean space, kept as a
  // separate kind so configs can label sequence-valued data.
  [[nodiscard]] static Space hilbert_l2(Eigen::Index dim, double beta = 1.0) {
    if (dim < 1) throw std::invalid_argument("Space::hilbert_l2: dim must be >= 1");
    return Space(SpaceKind::hilbert_l2, beta, dim, 0, "hilbert_l2", nullptr);
  }

  [[nodiscard]] static Space user_defined(std::string label, Metric base,
                                          double beta = 1.0) {
    if (!base) throw std::invalid_argument("Space::user_defined: metric callback required");
    return Space(SpaceKind::user_defined, beta, 0, 0, std::move(label), std::move(base));
  }

  // Effective distance base(p, q)^beta. Exponents 1 and 2 short-circuit so
  // the common cases stay exact.
  [[nodiscard]] double distance(const Point& p, const Point& q) const {
    check_point(p);
    check_point(q);
    const double d = base_distance(p, q);
    if (beta_ == 1.0) return d;
    if (beta_ == 2.0) return d * d;
    return std::pow(d, beta_);
  }

  // Raises the current distance to the given power; exponents compose, so
  // with_beta(with_beta(s, a), b) has exponent a*b over the base metric.
  [[nodiscard]] Space with_beta(double factor) const {
    if (!(factor > 0.0 && factor <= 2.0))
      throw std::invalid_argument("Space::with_beta: exponent must lie in (0, 2]");
    Space out = *this;
    out.beta_ = beta_ * factor;
    if (!(out.beta_ > 0.0 && out.beta_ <= 2.0))
      throw std::invalid_argument("Space::with_beta: composed exponent leaves (0, 2]");
    return out;
  }

  void check_point(const Point& p) const {
    switch (kind_) {
      case SpaceKind::euclidean:
      case SpaceKind::hilbert_l2:
        if (!p.is_vector() || p.vec().size() != dim_)
          throw std::invalid_argument("Space: point is not a vector of dimension " +
                                      std::to_string(dim_));
        return;
      case SpaceKind::discrete:
        if (!p.is_symbol() || p.sym() < 0 || p.sym() >= alphabet_)
          throw std::invalid_argument("Space: point is not a symbol in [0, " +
                                      std::to_string(alphabet_) + ")");
        return;
      case SpaceKind::user_defined:
        return;
    }
  }

  [[nodiscard]] SpaceKind kind() const { return kind_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  [[nodiscard]] std::int64_t alphabet() const { return alphabet_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] bool negative_type() const { return kind_ != SpaceKind::user_defined; }

 private:
  Space(SpaceKind kind, double beta, Eigen::Index dim, std::int64_t alphabet,
        std::string label, Metric base)
      : kind_(kind),
        beta_(beta),
        dim_(dim),
        alphabet_(alphabet),
        label_(std::move(label)),
        base_(std::move(base)) {
    if (!(beta > 0.0 && beta <= 2.0))
      throw std::invalid_argument("Space: beta must lie in (0, 2]");
  }

  [[nodiscard]] double base_distance(const Point& p, const Point& q) const {
    switch (kind_) {
      case SpaceKind::euclidean:
      case SpaceKind::hilbert_l2:
        return (p.vec() - q.vec()).norm();
      case SpaceKind::discrete:
        return p.sym() == q.sym() ? 0.0 : 1.0;
      case SpaceKind::user_defined:
        return base_(p, q);
    }
    return 0.0;
  }

  SpaceKind kind_;
  double beta_;
  Eigen::Index dim_;
  std::int64_t alphabet_;
  std::string label_;
  Metric base_;
};

struct TriangleReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  // max over triples of d(x,x') - 2^(beta-1) * (d(x,x0) + d(x0,x'))
  double worst_slack = -std::numeric_limits<double>::infinity();
};

inline constexpr double kTriangleSlackTolerance = 1e-12;

// Checks the weak triangle inequality on triples given as (x, x', x0), where
// x0 is the midpoint candidate. Requires beta in [1, 2].
[[nodiscard]] inline TriangleReport check_weak_triangle(
    const Space& space, std::span<const std::array<Point, 3>> triples) {
  if (space.beta() < 1.0 || space.beta() > 2.0)
    throw std::domain_error("check_weak_triangle: requires beta in [1, 2]");
  const double factor = std::pow(2.0, space.beta() - 1.0);
  TriangleReport report;
  for (const auto& t : triples) {
    const double lhs = space.distance(t[0], t[1]);
    const double rhs = factor * (space.distance(t[0], t[2]) + space.distance(t[2], t[1]));
    const double slack = lhs - rhs;
    ++report.checked;
    if (slack > kTriangleSlackTolerance) ++report.violations;
    if (slack > report.worst_slack) report.worst_slack = slack;
  }
  return report;
}

struct SpaceValidation {
  std::size_t pairs_checked = 0;
  std::size_t triples_checked = 0;
  std::size_t symmetry_violations = 0;
  std::size_t negativity_violations = 0;
  std::size_t identity_violations = 0;
  std::size_t triangle_violations = 0;
  double worst_triangle_slack = -std::numeric_limits<double>::infinity();
};

// Spot-checks metric axioms on randomly chosen pairs and triples from the
// given point pool. For beta <= 1 the plain triangle inequality is checked;
// above 1 the weak form with factor 2^(beta-1).
[[nodiscard]] inline SpaceValidation validate_space(const Space& space,
                                                    std::span<const Point> points,
                                                    std::size_t pairs,
                                                    std::size_t triples,
                                                    std::uint64_t seed) {
  if (points.size() < 2)
    throw std::invalid_argument("validate_space: need at least two points");
  Rng rng(seed);
  SpaceValidation v;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Point& p = points[rng.index(points.size())];
    const Point& q = points[rng.index(points.size())];
    const double dpq = space.distance(p, q);
    const double dqp = space.distance(q, p);
    ++v.pairs_checked;
    if (std::fabs(dpq - dqp) > kTriangleSlackTolerance) ++v.symmetry_violations;
    if (dpq < 0.0) ++v.negativity_violations;
    if (space.distance(p, p) > kTriangleSlackTolerance) ++v.identity_violations;
  }
  const double factor = space.beta() <= 1.0 ? 1.0 : std::pow(2.0, space.beta() - 1.0);
  for (std::size_t k = 0; k < triples; ++k) {
    const Point& x = points[rng.index(points.size())];
    const Point& y = points[rng.index(points.size())];
    const Point& m = points[rng.index(points.size())];
    const double slack =
        space.distance(x, y) - factor * (space.distance(x, m) + space.distance(m, y));
    ++v.triples_checked;
    if (slack > kTriangleSlackTolerance) ++v.triangle_violations;
    if (slack > v.worst_triangle_slack) v.worst_triangle_slack = slack;
  }
  return v;
}

// Random point generator for the built-in kinds: standard normal coordinates
// for vector spaces, uniform symbols for discrete ones.
[[nodiscard]] inline Point random_point(const Space& space, Rng& rng) {
  switch (space.kind()) {
    case SpaceKind::euclidean:
    case SpaceKind::hilbert_l2: {
      Eigen::VectorXd v(space.dim());
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
      return Point::vector(std::move(v));
    }
    case SpaceKind::discrete:
      return Point::symbol(static_cast<std::int64_t>(rng.below(
          static_cast<std::uint64_t>(space.alphabet()))));
    case SpaceKind::user_defined:
      throw std::invalid_argument(
          "random_point: no generator for user-defined spaces; supply points");
  }
  throw std::logic_error("random_point: unreachable");
}

}  // namespace dcv
