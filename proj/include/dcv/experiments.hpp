#pragma once

// Simulation experiments and the JSON reports the CLI emits. Every report
// embeds the resolved config echo and the master seed, and is a pure
// function of those two: replication r of grid cell c always draws from
// Rng(derive_stream(derive_stream(master_seed, c), r)), so reports are
// byte-identical across reruns and thread counts.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcv/config.hpp"
#include "dcv/csv.hpp"
#include "dcv/dcov.hpp"
#include "dcv/distribution.hpp"
#include "dcv/inference.hpp"
#include "dcv/parallel.hpp"
#include "dcv/processes.hpp"
#include "dcv/spectrum.hpp"
#include "dcv/stats.hpp"
#include "dcv/version.hpp"

namespace dcv {

// Sample described by the config: a CSV input block if present, otherwise a
// simulated path of length cfg.n from the process block. Relative input
// paths resolve against base_dir (the config file's directory).
[[nodiscard]] inline PairedSample config_sample(const Config& cfg, std::uint64_t seed,
                                                const std::string& base_dir = "") {
  if (cfg.input) {
    std::filesystem::path p(cfg.input->path);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    const CsvTable table = read_csv_file(p.string());
    return sample_from_csv(table, cfg.input->columns, cfg.space_x, cfg.space_y);
  }
  if (cfg.process) {
    if (cfg.n == 0)
      throw std::invalid_argument("config: simulating a sample requires n >= 1");
    return simulate(*cfg.process, cfg.n, seed);
  }
  throw std::invalid_argument("config: needs either an input block or a process block");
}

namespace detail {

inline json base_report(const char* command, const Config& cfg, std::uint64_t seed) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["config"] = config_json(cfg);
  return j;
}

}  // namespace detail

[[nodiscard]] inline json compute_report(const Config& cfg, std::uint64_t seed,
                                         const std::string& base_dir = "") {
  const PairedSample sample = config_sample(cfg, seed, base_dir);
  const DcovEstimate est = dcov(sample);
  json j = detail::base_report("compute", cfg, seed);
  j["n"] = est.n;
  j["dcov"] = est.dcov;
  j["D_mu"] = est.dist_mean_x;
  j["D_nu"] = est.dist_mean_y;
  if (est.normalized_defined)
    j["normalized"] = est.normalized;
  else
    j["normalized"] = nullptr;
  j["beta_x"] = est.beta_x;
  j["beta_y"] = est.beta_y;
  return j;
}

[[nodiscard]] inline json test_report(const Config& cfg, std::uint64_t seed, int threads,
                                      const std::string& base_dir = "") {
  const PairedSample sample = config_sample(cfg, seed, base_dir);
  TestResult result;
  switch (cfg.test.method) {
    case TestMethod::spectral: {
      SpectralTestOptions opt;
      opt.reps = cfg.test.reps;
      opt.bandwidth = cfg.test.bandwidth;
      opt.truncation = cfg.test.truncation;
      opt.threads = threads;
      result = spectral_test(sample, seed, opt);
      break;
    }
    case TestMethod::block_bootstrap: {
      BootstrapTestOptions opt;
      opt.reps = cfg.test.reps;
      opt.block_length = cfg.test.block_length;
      opt.paired_streams = cfg.test.paired_streams;
      opt.threads = threads;
      result = block_bootstrap_test(sample, seed, opt);
      break;
    }
    case TestMethod::permutation: {
      PermutationTestOptions opt;
      opt.reps = cfg.test.reps;
      opt.exact = cfg.test.exact;
      opt.threads = threads;
      result = permutation_test(sample, seed, opt);
      break;
    }
  }
  json j = detail::base_report("test", cfg, seed);
  j["method"] = to_string(result.method);
  j["n"] = result.n;
  j["statistic"] = result.statistic;
  j["p_value"] = result.p_value;
  j["reps"] = result.reps;
  j["degenerate"] = result.degenerate;
  j["exact"] = result.exact;
  if (result.bandwidth) j["bandwidth"] = *result.bandwidth;
  if (result.block_length) j["block_length"] = *result.block_length;
  if (cfg.test.method == TestMethod::permutation && cfg.process &&
      known_serially_dependent(*cfg.process))
    j["warning"] =
        "the process is serially dependent; permutation exchangeability fails, "
        "prefer the spectral or block-bootstrap test";
  return j;
}

// Median absolute estimation error against the exact population value, per
// grid cell. Requires a process whose population law is finitely supported.
[[nodiscard]] inline json convergence_report(const Config& cfg, std::uint64_t master,
                                             int threads) {
  if (!cfg.process)
    throw std::invalid_argument("convergence experiment: config needs a process block");
  const auto population = population_distribution(*cfg.process);
  if (!population)
    throw std::domain_error(
        "convergence experiment: the process has no finitely supported "
        "population law, so the exact target is unavailable");
  if (cfg.experiment.n_grid.empty())
    throw std::invalid_argument("convergence experiment: n_grid must be non-empty");
  const std::size_t seeds = cfg.experiment.seeds;
  if (seeds == 0)
    throw std::invalid_argument("convergence experiment: seeds must be >= 1");
  const double target = population_dcov(*population);

  const std::size_t cells = cfg.experiment.n_grid.size();
  std::vector<std::vector<double>> errors(cells, std::vector<double>(seeds, 0.0));
  parallel_for(cells * seeds, threads, [&](std::size_t i) {
    const std::size_t c = i / seeds;
    const std::size_t s = i % seeds;
    const PairedSample sample =
        simulate(*cfg.process, cfg.experiment.n_grid[c],
                 derive_stream(derive_stream(master, c), s));
    errors[c][s] = std::fabs(dcov(sample).dcov - target);
  });

  json j = detail::base_report("experiment", cfg, master);
  j["kind"] = "convergence";
  j["target"] = target;
  json cell_list = json::array();
  for (std::size_t c = 0; c < cells; ++c) {
    json cell;
    cell["n"] = cfg.experiment.n_grid[c];
    cell["median_abs_error"] = median(errors[c]);
    cell["q25_abs_error"] = quantile(errors[c], 0.25);
    cell["q75_abs_error"] = quantile(errors[c], 0.75);
    if (cfg.experiment.raw) cell["errors"] = errors[c];
    cell_list.push_back(std::move(cell));
  }
  j["cells"] = std::move(cell_list);
  return j;
}

// Distribution of n * dcov under repeated simulation, compared against the
// spectral null fitted on the first replication; also the mean of the
// normalized statistic Q, which targets 1 when the limit scores are
// standardized (e.g. one mixing side, one iid side).
[[nodiscard]] inline json nulldist_report(const Config& cfg, std::uint64_t master,
                                          int threads) {
  if (!cfg.process)
    throw std::invalid_argument("nulldist experiment: config needs a process block");
  if (cfg.n < 10)
    throw std::invalid_argument("nulldist experiment: needs n >= 10");
  const std::size_t reps = cfg.experiment.reps;
  if (reps == 0) throw std::invalid_argument("nulldist experiment: reps must be >= 1");

  std::vector<double> stats(reps, 0.0);
  std::vector<double> qs(reps, 0.0);
  std::vector<char> q_ok(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    const PairedSample sample =
        simulate(*cfg.process, cfg.n, derive_stream(derive_stream(master, 0), r));
    const DcovEstimate est = dcov(sample);
    stats[r] = static_cast<double>(est.n) * est.dcov;
    q_ok[r] = est.normalized_defined ? 1 : 0;
    qs[r] = static_cast<double>(est.n) * est.normalized;
  });

  // reference spectral null from replication 0
  const PairedSample reference =
      simulate(*cfg.process, cfg.n, derive_stream(derive_stream(master, 0), 0));
  const CenteredMatrix a =
      double_center(distance_matrix(reference.xs, reference.space_x));
  const CenteredMatrix b =
      double_center(distance_matrix(reference.ys, reference.space_y));
  const SpectralModel model =
      empirical_spectrum(delta_matrix(a, b), cfg.experiment.truncation);
  std::vector<double> null_draws(cfg.experiment.null_draws, 0.0);
  if (model.kept > 0) {
    const LongRunCovariance lrc = long_run_covariance(model, cfg.experiment.bandwidth);
    null_draws = simulate_null(model, lrc, cfg.experiment.null_draws,
                               derive_stream(master, 1), threads)
                     .draws;
  }

  json j = detail::base_report("experiment", cfg, master);
  j["kind"] = "nulldist";
  j["n"] = cfg.n;
  j["reps"] = reps;
  j["null_draws_count"] = cfg.experiment.null_draws;
  if (reps >= 2) {
    j["ks"] = ks_distance(stats, null_draws);
    j["ks_defined"] = true;
  } else {
    j["ks"] = nullptr;
    j["ks_defined"] = false;
  }
  bool q_defined = true;
  for (char ok : q_ok) q_defined = q_defined && ok != 0;
  if (q_defined) {
    const double mean_q = mean(qs);
    j["mean_q"] = mean_q;
    if (reps >= 2) {
      const double se = std::sqrt(variance(qs) / static_cast<double>(reps));
      j["se_q"] = se;
      j["q_consistent"] = std::fabs(mean_q - 1.0) <= 3.0 * se;
    }
  } else {
    j["mean_q"] = nullptr;
  }
  if (!known_independent(*cfg.process))
    j["warning"] =
        "the process is not independent by construction; this measures power, "
        "not level";
  if (cfg.experiment.raw) {
    j["stats"] = stats;
    j["null_draws"] = null_draws;
  }
  return j;
}

// Sample variance of the degenerate component surrogate V = dcov/15 across
// replications, per grid cell, with the n^2-scaled values exposing the
// degenerate rate directly.
[[nodiscard]] inline json varscaling_report(const Config& cfg, std::uint64_t master,
                                            int threads) {
  if (!cfg.process)
    throw std::invalid_argument("varscaling experiment: config needs a process block");
  if (cfg.experiment.n_grid.size() < 2)
    throw std::domain_error(
        "varscaling experiment: needs at least two grid sizes to compare");
  const std::size_t reps = cfg.experiment.reps;
  if (reps < 2)
    throw std::invalid_argument("varscaling experiment: reps must be >= 2");

  const std::size_t cells = cfg.experiment.n_grid.size();
  std::vector<std::vector<double>> values(cells, std::vector<double>(reps, 0.0));
  parallel_for(cells * reps, threads, [&](std::size_t i) {
    const std::size_t c = i / reps;
    const std::size_t r = i % reps;
    const PairedSample sample =
        simulate(*cfg.process, cfg.experiment.n_grid[c],
                 derive_stream(derive_stream(master, c), r));
    const CenteredMatrix ca = double_center(distance_matrix(sample.xs, sample.space_x));
    const CenteredMatrix cb = double_center(distance_matrix(sample.ys, sample.space_y));
    const Eigen::MatrixXd delta = ca.values.cwiseProduct(cb.values);
    values[c][r] = vstat(
        sample, 2,
        [&](std::span<const std::size_t> idx) {
          return delta(static_cast<Eigen::Index>(idx[0]),
                       static_cast<Eigen::Index>(idx[1])) /
                 15.0;
        },
        1e9);
  });

  json j = detail::base_report("experiment", cfg, master);
  j["kind"] = "varscaling";
  json cell_list = json::array();
  std::vector<double> scaled(cells, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double v = variance(values[c]);
    const double n = static_cast<double>(cfg.experiment.n_grid[c]);
    scaled[c] = n * n * v;
    json cell;
    cell["n"] = cfg.experiment.n_grid[c];
    cell["variance"] = v;
    cell["n2_variance"] = scaled[c];
    if (cfg.experiment.raw) cell["values"] = values[c];
    cell_list.push_back(std::move(cell));
  }
  j["cells"] = std::move(cell_list);
  json ratios = json::array();
  for (std::size_t c = 0; c + 1 < cells; ++c)
    ratios.push_back(scaled[c] != 0.0 ? json(scaled[c + 1] / scaled[c]) : json());
  j["n2_variance_ratios"] = std::move(ratios);
  if (!known_independent(*cfg.process))
    j["warning"] =
        "the process is not independent by construction; the degenerate "
        "scaling rate applies under independence";
  return j;
}

[[nodiscard]] inline json experiment_report(const Config& cfg, std::uint64_t master,
                                            int threads) {
  const std::string& kind = cfg.experiment.kind;
  if (kind == "convergence") return convergence_report(cfg, master, threads);
  if (kind == "nulldist") return nulldist_report(cfg, master, threads);
  if (kind == "varscaling") return varscaling_report(cfg, master, threads);
  throw std::invalid_argument("unknown experiment kind '" + kind + "'");
}

// lag, beta, alpha_upper rows for the configured chain.
[[nodiscard]] inline std::string mixing_csv(const Config& cfg) {
  if (!cfg.process)
    throw std::invalid_argument("mixing profile: config needs a process block");
  const auto* mk = std::get_if<MarkovPairSpec>(&cfg.process->kind);
  if (!mk)
    throw std::domain_error(
        "mixing profile: exact coefficients are available for markov_pair "
        "processes only");
  const Eigen::VectorXd pi = mk->stationary.size() != 0
                                 ? mk->stationary
                                 : stationary_distribution(mk->transition);
  std::vector<std::size_t> lags = cfg.lags;
  if (lags.empty())
    for (std::size_t l = 1; l <= 20; ++l) lags.push_back(l);
  const MixingProfile profile = markov_beta_mixing(mk->transition, pi, lags);
  std::ostringstream out;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < profile.lags.size(); ++i)
    rows.push_back({std::to_string(profile.lags[i]), format_double(profile.beta[i]),
                    format_double(profile.alpha_upper[i])});
  const std::vector<std::string> header = {"lag", "beta", "alpha_upper"};
  write_csv(out, header, rows);
  return out.str();
}

[[nodiscard]] inline json validate_space_report(const Config& cfg, std::uint64_t seed,
                                                std::size_t pairs, std::size_t triples,
                                                const std::string& base_dir = "") {
  if (!cfg.space_x || !cfg.space_y)
    throw std::invalid_argument("validate-space: config needs space_x and space_y");
  std::optional<PairedSample> data;
  if (cfg.input) data = config_sample(cfg, seed, base_dir);

  const auto side = [&](const Space& space, bool x_side, std::uint64_t side_seed) {
    std::vector<Point> points;
    if (data) {
      points = x_side ? data->xs : data->ys;
    } else {
      Rng rng(side_seed);
      for (std::size_t i = 0; i < 256; ++i) points.push_back(random_point(space, rng));
    }
    const SpaceValidation v =
        validate_space(space, points, pairs, triples, derive_stream(side_seed, 1));
    json j;
    j["space"] = space_json(space);
    j["points"] = points.size();
    j["pairs_checked"] = v.pairs_checked;
    j["triples_checked"] = v.triples_checked;
    j["symmetry_violations"] = v.symmetry_violations;
    j["negativity_violations"] = v.negativity_violations;
    j["identity_violations"] = v.identity_violations;
    j["triangle_violations"] = v.triangle_violations;
    j["worst_triangle_slack"] = v.worst_triangle_slack;
    return j;
  };

  json j = detail::base_report("validate-space", cfg, seed);
  j["x"] = side(*cfg.space_x, true, derive_stream(seed, 0));
  j["y"] = side(*cfg.space_y, false, derive_stream(seed, 1));
  return j;
}

}  // namespace dcv
