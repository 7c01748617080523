#pragma once

// Stationary pair processes for the experiments, plus exact mixing
// coefficients for finite-state chains.
//
// For a stationary Markov chain with transition P and stationary law pi the
// absolute-regularity coefficient at lag m has the closed form
//   beta(m) = sum_i pi_i * TV(P^m(i, .), pi),   TV = half the L1 distance,
// and alpha(m) <= beta(m) / 2. Finite-state ergodic chains mix geometrically
// (rate governed by the second-largest eigenvalue modulus), so polynomial
// decay cannot be produced by this family; the exact-profile machinery is
// Markov-only by design. The AR(1) latent process is likewise geometrically
// mixing but has no finite-state identity, so no exact profile is offered.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dcv/distribution.hpp"
#include "dcv/rng.hpp"
#include "dcv/sample.hpp"
#include "dcv/space.hpp"

namespace dcv {

// ---------------------------------------------------------------------------
// process specs

struct IidDiscreteSpec {
  std::vector<Point> atoms_x;
  std::vector<Point> atoms_y;
  std::vector<double> weights;
};

// (X, Y) jointly Gaussian with unit variances and correlation rho, emitted
// as 1-dimensional points.
struct GaussianCopulaSpec {
  double rho = 0.0;
};

struct MarkovPairSpec {
  Eigen::MatrixXd transition;
  Eigen::VectorXd stationary;  // empty = compute from transition
  std::vector<Point> emit_x;   // per-state emissions
  std::vector<Point> emit_y;
};

enum class Ar1Emission { identity, square, cube, sine, abs_value, negate, sign_symbol };

[[nodiscard]] inline Ar1Emission parse_ar1_emission(const std::string& name) {
  if (name == "identity") return Ar1Emission::identity;
  if (name == "square") return Ar1Emission::square;
  if (name == "cube") return Ar1Emission::cube;
  if (name == "sine") return Ar1Emission::sine;
  if (name == "abs_value") return Ar1Emission::abs_value;
  if (name == "negate") return Ar1Emission::negate;
  if (name == "sign_symbol") return Ar1Emission::sign_symbol;
  throw std::invalid_argument("unknown ar1 emission map: " + name);
}

[[nodiscard]] inline const char* to_string(Ar1Emission e) {
  switch (e) {
    case Ar1Emission::identity: return "identity";
    case Ar1Emission::square: return "square";
    case Ar1Emission::cube: return "cube";
    case Ar1Emission::sine: return "sine";
    case Ar1Emission::abs_value: return "abs_value";
    case Ar1Emission::negate: return "negate";
    case Ar1Emission::sign_symbol: return "sign_symbol";
  }
  return "unknown";
}

// One shared latent AR(1) chain s_t = rho s_(t-1) + eps_t (unit innovations,
// stationary start); both coordinates are pure emissions of s_t. identity x
// square gives the classic dependent-but-uncorrelated pair.
struct Ar1LatentSpec {
  double rho = 0.5;
  Ar1Emission emit_x = Ar1Emission::identity;
  Ar1Emission emit_y = Ar1Emission::identity;
};

struct ProcessSpec;

// xs from the x sub-process, ys from the y sub-process, simulated on
// decorrelated seed streams: independence holds by construction.
struct IndependentProductSpec {
  std::shared_ptr<const ProcessSpec> x;
  std::shared_ptr<const ProcessSpec> y;
};

struct ProcessSpec {
  std::variant<IidDiscreteSpec, GaussianCopulaSpec, MarkovPairSpec, Ar1LatentSpec,
               IndependentProductSpec>
      kind;
  Space space_x;
  Space space_y;
};

[[nodiscard]] inline Space ar1_emission_space(Ar1Emission e) {
  return e == Ar1Emission::sign_symbol ? Space::discrete(2) : Space::euclidean(1);
}

// ---------------------------------------------------------------------------
// markov helpers

inline void check_transition_matrix(const Eigen::MatrixXd& p) {
  const Eigen::Index m = p.rows();
  if (m < 1 || p.cols() != m)
    throw std::invalid_argument("markov: transition matrix must be square");
  for (Eigen::Index i = 0; i < m; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (p(i, j) < 0.0)
        throw std::invalid_argument("markov: negative transition probability");
      row += p(i, j);
    }
    if (std::fabs(row - 1.0) > 1e-12)
      throw std::invalid_argument("markov: row " + std::to_string(i) +
                                  " does not sum to 1");
  }
}

inline void check_stationary(const Eigen::MatrixXd& p, const Eigen::VectorXd& pi) {
  if (pi.size() != p.rows())
    throw std::invalid_argument("markov: stationary vector size mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    if (pi[i] < -1e-12) throw std::invalid_argument("markov: negative stationary mass");
    total += pi[i];
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("markov: stationary vector does not sum to 1");
  const Eigen::VectorXd residual = p.transpose() * pi - pi;
  if (residual.cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("markov: vector is not stationary for the transition");
}

// Stationary law as the constrained least-squares solution of
// [P' - I; 1'] pi = [0; 1].
[[nodiscard]] inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p) {
  check_transition_matrix(p);
  const Eigen::Index m = p.rows();
  Eigen::MatrixXd a(m + 1, m);
  a.topRows(m) = p.transpose() - Eigen::MatrixXd::Identity(m, m);
  a.bottomRows(1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs[m] = 1.0;
  Eigen::VectorXd pi = a.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index i = 0; i < m; ++i) pi[i] = std::max(pi[i], 0.0);
  pi /= pi.sum();
  check_stationary(p, pi);
  return pi;
}

struct MixingProfile {
  std::vector<std::size_t> lags;
  std::vector<double> beta;
  std::vector<double> alpha_upper;  // beta / 2
};

// Exact beta coefficients by repeated matrix powering, evaluated at the
// requested lags (arbitrary order, each >= 1).
[[nodiscard]] inline MixingProfile markov_beta_mixing(const Eigen::MatrixXd& p,
                                                      const Eigen::VectorXd& pi,
                                                      std::span<const std::size_t> lags) {
  check_transition_matrix(p);
  check_stationary(p, pi);
  if (lags.empty()) throw std::invalid_argument("markov_beta_mixing: empty lag list");
  for (std::size_t lag : lags)
    if (lag == 0) throw std::invalid_argument("markov_beta_mixing: lags must be >= 1");

  std::vector<std::size_t> order(lags.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lags[a] < lags[b]; });

  MixingProfile profile;
  profile.lags.assign(lags.begin(), lags.end());
  profile.beta.assign(lags.size(), 0.0);
  profile.alpha_upper.assign(lags.size(), 0.0);

  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(p.rows(), p.cols());
  std::size_t current = 0;
  for (std::size_t pos : order) {
    while (current < lags[pos]) {
      power = (power * p).eval();
      ++current;
    }
    double beta = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      double tv = 0.0;
      for (Eigen::Index j = 0; j < p.cols(); ++j) tv += std::fabs(power(i, j) - pi[j]);
      beta += pi[i] * 0.5 * tv;
    }
    profile.beta[pos] = beta;
    profile.alpha_upper[pos] = 0.5 * beta;
  }
  return profile;
}

// Second-largest eigenvalue modulus of a stochastic matrix (the unit
// eigenvalue is removed once).
[[nodiscard]] inline double slem(const Eigen::MatrixXd& p) {
  check_transition_matrix(p);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(p);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("slem: eigensolver failed");
  std::vector<double> moduli;
  std::size_t unit = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const std::complex<double> ev = solver.eigenvalues()[i];
    moduli.push_back(std::abs(ev));
    const double gap = std::abs(ev - std::complex<double>(1.0, 0.0));
    if (gap < best) {
      best = gap;
      unit = static_cast<std::size_t>(i);
    }
  }
  double second = 0.0;
  for (std::size_t i = 0; i < moduli.size(); ++i)
    if (i != unit) second = std::max(second, moduli[i]);
  return second;
}

// ---------------------------------------------------------------------------
// validation and population laws

namespace detail {

inline void validate_process(const ProcessSpec& spec) {
  if (const auto* iid = std::get_if<IidDiscreteSpec>(&spec.kind)) {
    if (iid->atoms_x.size() != iid->atoms_y.size() ||
        iid->atoms_x.size() != iid->weights.size() || iid->atoms_x.empty())
      throw std::invalid_argument("iid_discrete: misaligned atoms and weights");
    double total = 0.0;
    for (double w : iid->weights) {
      if (w < 0.0) throw std::invalid_argument("iid_discrete: negative weight");
      total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12)
      throw std::invalid_argument("iid_discrete: weights must sum to 1");
    for (const auto& a : iid->atoms_x) spec.space_x.check_point(a);
    for (const auto& a : iid->atoms_y) spec.space_y.check_point(a);
  } else if (const auto* cop = std::get_if<GaussianCopulaSpec>(&spec.kind)) {
    if (!(cop->rho >= -1.0 && cop->rho <= 1.0))
      throw std::invalid_argument("gaussian_copula: rho must lie in [-1, 1]");
    for (const Space* s : {&spec.space_x, &spec.space_y})
      if ((s->kind() != SpaceKind::euclidean && s->kind() != SpaceKind::hilbert_l2) ||
          s->dim() != 1)
        throw std::invalid_argument("gaussian_copula: emits 1-dimensional vectors");
  } else if (const auto* mk = std::get_if<MarkovPairSpec>(&spec.kind)) {
    check_transition_matrix(mk->transition);
    const auto states = static_cast<std::size_t>(mk->transition.rows());
    if (mk->emit_x.size() != states || mk->emit_y.size() != states)
      throw std::invalid_argument("markov_pair: one emission per state required");
    if (mk->stationary.size() != 0) check_stationary(mk->transition, mk->stationary);
    for (const auto& a : mk->emit_x) spec.space_x.check_point(a);
    for (const auto& a : mk->emit_y) spec.space_y.check_point(a);
  } else if (const auto* ar = std::get_if<Ar1LatentSpec>(&spec.kind)) {
    if (!(std::fabs(ar->rho) < 1.0))
      throw std::invalid_argument("ar1_latent: |rho| < 1 required");
    if (ar1_emission_space(ar->emit_x).kind() != spec.space_x.kind())
      throw std::invalid_argument("ar1_latent: space_x does not match the emission");
    if (ar1_emission_space(ar->emit_y).kind() != spec.space_y.kind())
      throw std::invalid_argument("ar1_latent: space_y does not match the emission");
  } else if (const auto* prod = std::get_if<IndependentProductSpec>(&spec.kind)) {
    if (!prod->x || !prod->y)
      throw std::invalid_argument("independent_product: missing sub-process");
  }
}

[[nodiscard]] inline Point apply_emission(Ar1Emission e, double s) {
  switch (e) {
    case Ar1Emission::identity: return Point::real(s);
    case Ar1Emission::square: return Point::real(s * s);
    case Ar1Emission::cube: return Point::real(s * s * s);
    case Ar1Emission::sine: return Point::real(std::sin(s));
    case Ar1Emission::abs_value: return Point::real(std::fabs(s));
    case Ar1Emission::negate: return Point::real(-s);
    case Ar1Emission::sign_symbol: return Point::symbol(s >= 0.0 ? 1 : 0);
  }
  throw std::logic_error("apply_emission: unreachable");
}

// Marginal of an aligned atom list: distinct values with summed weights.
inline void marginalize(std::span<const Point> atoms, std::span<const double> weights,
                        std::vector<Point>& out_atoms, std::vector<double>& out_w) {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    bool merged = false;
    for (std::size_t j = 0; j < out_atoms.size(); ++j)
      if (same_point(out_atoms[j], atoms[i])) {
        out_w[j] += weights[i];
        merged = true;
        break;
      }
    if (!merged) {
      out_atoms.push_back(atoms[i]);
      out_w.push_back(weights[i]);
    }
  }
}

}  // namespace detail

// Exact law of (x_t, y_t) at a fixed t, when finitely supported: available
// for iid atoms, stationary Markov emissions, and independent products of
// such. Empty for the continuous kinds.
[[nodiscard]] inline std::optional<DiscreteJointDistribution> population_distribution(
    const ProcessSpec& spec) {
  detail::validate_process(spec);
  if (const auto* iid = std::get_if<IidDiscreteSpec>(&spec.kind))
    return DiscreteJointDistribution(iid->atoms_x, iid->atoms_y, iid->weights,
                                     spec.space_x, spec.space_y);
  if (const auto* mk = std::get_if<MarkovPairSpec>(&spec.kind)) {
    const Eigen::VectorXd pi = mk->stationary.size() != 0
                                   ? mk->stationary
                                   : stationary_distribution(mk->transition);
    std::vector<double> w(static_cast<std::size_t>(pi.size()));
    for (Eigen::Index i = 0; i < pi.size(); ++i) w[static_cast<std::size_t>(i)] = pi[i];
    return DiscreteJointDistribution(mk->emit_x, mk->emit_y, w, spec.space_x,
                                     spec.space_y);
  }
  if (const auto* prod = std::get_if<IndependentProductSpec>(&spec.kind)) {
    const auto px = population_distribution(*prod->x);
    const auto py = population_distribution(*prod->y);
    if (!px || !py) return std::nullopt;
    std::vector<Point> ax;
    std::vector<double> wx;
    std::vector<Point> ay;
    std::vector<double> wy;
    detail::marginalize(px->xs, px->weights, ax, wx);
    detail::marginalize(py->ys, py->weights, ay, wy);
    return product_measure(ax, wx, ay, wy, prod->x->space_x, prod->y->space_y);
  }
  return std::nullopt;
}

// True when the process guarantees independence of x_t and y_t by construction.
[[nodiscard]] inline bool known_independent(const ProcessSpec& spec) {
  if (std::holds_alternative<IndependentProductSpec>(spec.kind)) return true;
  if (const auto* cop = std::get_if<GaussianCopulaSpec>(&spec.kind))
    return cop->rho == 0.0;
  if (const auto* iid = std::get_if<IidDiscreteSpec>(&spec.kind)) {
    std::vector<Point> ax;
    std::vector<double> wx;
    std::vector<Point> ay;
    std::vector<double> wy;
    detail::marginalize(iid->atoms_x, iid->weights, ax, wx);
    detail::marginalize(iid->atoms_y, iid->weights, ay, wy);
    for (std::size_t i = 0; i < iid->atoms_x.size(); ++i) {
      double px = 0.0;
      double py = 0.0;
      for (std::size_t a = 0; a < ax.size(); ++a)
        if (same_point(ax[a], iid->atoms_x[i])) px = wx[a];
      for (std::size_t b = 0; b < ay.size(); ++b)
        if (same_point(ay[b], iid->atoms_y[i])) py = wy[b];
      if (std::fabs(iid->weights[i] - px * py) > 1e-12) return false;
    }
    return true;
  }
  return false;
}

// True when consecutive pairs are serially dependent, which breaks the
// exchangeability a permutation null relies on.
[[nodiscard]] inline bool known_serially_dependent(const ProcessSpec& spec) {
  if (const auto* mk = std::get_if<MarkovPairSpec>(&spec.kind)) {
    // iid in disguise: every row equal to the stationary law
    const Eigen::VectorXd pi = mk->stationary.size() != 0
                                   ? mk->stationary
                                   : stationary_distribution(mk->transition);
    for (Eigen::Index i = 0; i < mk->transition.rows(); ++i)
      for (Eigen::Index j = 0; j < mk->transition.cols(); ++j)
        if (std::fabs(mk->transition(i, j) - pi[j]) > 1e-12) return true;
    return false;
  }
  if (const auto* ar = std::get_if<Ar1LatentSpec>(&spec.kind)) return ar->rho != 0.0;
  if (const auto* prod = std::get_if<IndependentProductSpec>(&spec.kind))
    return known_serially_dependent(*prod->x) || known_serially_dependent(*prod->y);
  return false;
}

// ---------------------------------------------------------------------------
// simulation

// Stationary path of length n, fully determined by (spec, n, seed).
[[nodiscard]] inline PairedSample simulate(const ProcessSpec& spec, std::size_t n,
                                           std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("simulate: n must be >= 1");
  detail::validate_process(spec);
  std::vector<Point> xs;
  std::vector<Point> ys;
  xs.reserve(n);
  ys.reserve(n);

  if (const auto* iid = std::get_if<IidDiscreteSpec>(&spec.kind)) {
    Rng rng(seed);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i = rng.categorical(iid->weights);
      xs.push_back(iid->atoms_x[i]);
      ys.push_back(iid->atoms_y[i]);
    }
  } else if (const auto* cop = std::get_if<GaussianCopulaSpec>(&spec.kind)) {
    Rng rng(seed);
    const double tail = std::sqrt(1.0 - cop->rho * cop->rho);
    for (std::size_t t = 0; t < n; ++t) {
      const double z1 = rng.normal();
      const double z2 = cop->rho * z1 + tail * rng.normal();
      xs.push_back(Point::real(z1));
      ys.push_back(Point::real(z2));
    }
  } else if (const auto* mk = std::get_if<MarkovPairSpec>(&spec.kind)) {
    Rng rng(seed);
    const Eigen::VectorXd pi = mk->stationary.size() != 0
                                   ? mk->stationary
                                   : stationary_distribution(mk->transition);
    const auto states = static_cast<std::size_t>(mk->transition.rows());
    std::vector<double> init(states);
    for (std::size_t i = 0; i < states; ++i)
      init[i] = pi[static_cast<Eigen::Index>(i)];
    std::vector<std::vector<double>> rows(states, std::vector<double>(states));
    for (std::size_t i = 0; i < states; ++i)
      for (std::size_t j = 0; j < states; ++j)
        rows[i][j] = mk->transition(static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(j));
    std::size_t state = rng.categorical(init);
    for (std::size_t t = 0; t < n; ++t) {
      xs.push_back(mk->emit_x[state]);
      ys.push_back(mk->emit_y[state]);
      state = rng.categorical(rows[state]);
    }
  } else if (const auto* ar = std::get_if<Ar1LatentSpec>(&spec.kind)) {
    Rng rng(seed);
    double s = rng.normal() / std::sqrt(1.0 - ar->rho * ar->rho);
    for (std::size_t t = 0; t < n; ++t) {
      xs.push_back(detail::apply_emission(ar->emit_x, s));
      ys.push_back(detail::apply_emission(ar->emit_y, s));
      s = ar->rho * s + rng.normal();
    }
  } else if (const auto* prod = std::get_if<IndependentProductSpec>(&spec.kind)) {
    PairedSample sx = simulate(*prod->x, n, derive_stream(seed, 1));
    PairedSample sy = simulate(*prod->y, n, derive_stream(seed, 2));
    return PairedSample(std::move(sx.xs), std::move(sy.ys), sx.space_x, sy.space_y);
  }

  return PairedSample(std::move(xs), std::move(ys), spec.space_x, spec.space_y);
}

}  // namespace dcv
