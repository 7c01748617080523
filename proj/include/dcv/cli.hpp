#pragma once

// Command-line front end. Subcommands: compute, test, experiment, mixing,
// validate-space. Shared flags: --config PATH (required), --seed U64
// (overrides the config seed), --out PATH (default stdout), --threads N.
// Reports are JSON (mixing emits CSV); given the same config and seed the
// output bytes are identical for any thread count. Exit code 0 on success
// (a rejecting test is still a success), 1 on config or data errors.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcv/config.hpp"
#include "dcv/experiments.hpp"
#include "dcv/version.hpp"

namespace dcv {

namespace detail {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  int threads = 1;
};

inline void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON configuration file")
      ->required();
  cmd->add_option("--seed", flags.seed, "master seed (overrides the config)");
  cmd->add_option("--out", flags.out_path, "output path (default: stdout)");
  cmd->add_option("--threads", flags.threads, "worker threads")
      ->check(CLI::PositiveNumber);
}

inline int emit(const std::string& text, const std::string& out_path, std::ostream& fallback) {
  if (out_path.empty()) {
    fallback << text;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << out_path << "\n";
    return 1;
  }
  out << text;
  return 0;
}

inline std::string render(const json& report) { return report.dump(2) + "\n"; }

}  // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out_stream = std::cout,
                   std::ostream& err_stream = std::cerr) {
  CLI::App app{"distance covariance toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  detail::CommonFlags compute_flags;
  detail::CommonFlags test_flags;
  detail::CommonFlags experiment_flags;
  detail::CommonFlags mixing_flags;
  detail::CommonFlags validate_flags;
  std::string method;
  std::optional<std::size_t> reps_override;
  std::string experiment_kind;
  std::size_t pairs = 2000;
  std::size_t triples = 2000;

  CLI::App* compute = app.add_subcommand(
      "compute", "distance covariance of a data file or simulated sample");
  detail::add_common(compute, compute_flags);

  CLI::App* test = app.add_subcommand("test", "independence test");
  detail::add_common(test, test_flags);
  test->add_option("--method", method,
                   "spectral | block-bootstrap | permutation (overrides the config)");
  test->add_option("--reps", reps_override, "null replications (overrides the config)");

  CLI::App* experiment = app.add_subcommand(
      "experiment", "convergence | nulldist | varscaling study from the config");
  detail::add_common(experiment, experiment_flags);
  experiment->add_option("--kind", experiment_kind,
                         "experiment kind (overrides the config)");

  CLI::App* mixing = app.add_subcommand(
      "mixing", "exact beta mixing profile of the configured chain (CSV)");
  detail::add_common(mixing, mixing_flags);

  CLI::App* validate = app.add_subcommand("validate-space",
                                          "spot-check metric axioms of the "
                                          "configured spaces");
  detail::add_common(validate, validate_flags);
  validate->add_option("--pairs", pairs, "pairs to check");
  validate->add_option("--triples", triples, "triples to check");

  std::vector<const char*> argv;
  argv.push_back("dcv");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const auto run = [&](const detail::CommonFlags& flags, const auto& body) -> int {
    try {
      Config cfg = load_config(flags.config_path);
      if (flags.seed) cfg.seed = *flags.seed;
      const std::string base_dir =
          std::filesystem::path(flags.config_path).parent_path().string();
      return detail::emit(body(cfg, cfg.seed, base_dir), flags.out_path, out_stream);
    } catch (const std::exception& e) {
      err_stream << "error: " << e.what() << "\n";
      return 1;
    }
  };

  if (compute->parsed())
    return run(compute_flags,
               [&](Config& cfg, std::uint64_t seed, const std::string& base) {
                 return detail::render(compute_report(cfg, seed, base));
               });
  if (test->parsed())
    return run(test_flags, [&](Config& cfg, std::uint64_t seed, const std::string& base) {
      if (!method.empty()) cfg.test.method = parse_method(method);
      if (reps_override) cfg.test.reps = *reps_override;
      const json report = test_report(cfg, seed, test_flags.threads, base);
      if (report.contains("warning"))
        err_stream << "warning: " << report.at("warning").get<std::string>() << "\n";
      return detail::render(report);
    });
  if (experiment->parsed())
    return run(experiment_flags,
               [&](Config& cfg, std::uint64_t seed, const std::string&) {
                 if (!experiment_kind.empty()) cfg.experiment.kind = experiment_kind;
                 const json report =
                     experiment_report(cfg, seed, experiment_flags.threads);
                 if (report.contains("warning"))
                   err_stream << "warning: " << report.at("warning").get<std::string>()
                              << "\n";
                 return detail::render(report);
               });
  if (mixing->parsed())
    return run(mixing_flags, [&](Config& cfg, std::uint64_t, const std::string&) {
      return mixing_csv(cfg);
    });
  if (validate->parsed())
    return run(validate_flags,
               [&](Config& cfg, std::uint64_t seed, const std::string& base) {
                 return detail::render(
                     validate_space_report(cfg, seed, pairs, triples, base));
               });
  return 1;
}

inline int run_cli(int argc, char** argv, std::ostream& out_stream = std::cout,
                   std::ostream& err_stream = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args), out_stream, err_stream);
}

}  // namespace dcv
