#pragma once

// JSON configuration. parse_config builds the runtime objects; config_json
// re-serializes the resolved configuration (defaults materialized) so that a
// report's embedded config echo is sufficient to rerun it. Unknown keys are
// errors: a typo should fail loudly, not silently fall back to a default.
//
// Schema sketch:
// {
//   "seed": 7, "n": 200,
//   "space_x": {"kind":"euclidean","dim":1,"beta":1.0},
//   "space_y": {"kind":"discrete","alphabet":2,"beta":1.0},
//   "process": {"kind":"markov_pair","transition":[[...],...],
//               "stationary":[...], "emission_x":[...], "emission_y":[...]},
//   "input": {"path":"data.csv","x_columns":["x1"],"y_columns":["y"],
//             "x_symbolic":false,"y_symbolic":true},
//   "test": {"method":"spectral","reps":199,"bandwidth":null,
//            "block_length":null,"exact":false,"paired_streams":false},
//   "experiment": {"kind":"convergence","n_grid":[100,400,1600],"seeds":50,
//                  "reps":200,"null_draws":4000,"raw":false},
//   "lags": [1,2,3]
// }
// Process kinds: iid_discrete (atoms_x/atoms_y/weights), gaussian_copula
// (rho), markov_pair, ar1_latent (rho, emission names), independent_product
// (x/y sub-process objects; any process object may carry its own
// space_x/space_y, defaulting to the enclosing ones).

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcv/csv.hpp"
#include "dcv/inference.hpp"
#include "dcv/processes.hpp"
#include "dcv/space.hpp"
#include "dcv/spectrum.hpp"

namespace dcv {

using json = nlohmann::json;

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object())
    throw std::invalid_argument("config: " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

[[nodiscard]] inline Space parse_space(const json& j, const std::string& where) {
  detail::check_keys(j, {"kind", "dim", "alphabet", "beta"}, where);
  const std::string kind = j.at("kind").get<std::string>();
  const double beta = j.value("beta", 1.0);
  if (kind == "euclidean")
    return Space::euclidean(j.value("dim", Eigen::Index{1}), beta);
  if (kind == "hilbert_l2")
    return Space::hilbert_l2(j.value("dim", Eigen::Index{1}), beta);
  if (kind == "discrete")
    return Space::discrete(j.value("alphabet", std::int64_t{2}), beta);
  throw std::invalid_argument("config: unknown space kind '" + kind + "' in " + where);
}

[[nodiscard]] inline json space_json(const Space& s) {
  json j;
  j["kind"] = to_string(s.kind());
  j["beta"] = s.beta();
  if (s.kind() == SpaceKind::discrete)
    j["alphabet"] = s.alphabet();
  else
    j["dim"] = s.dim();
  return j;
}

[[nodiscard]] inline Point parse_point(const json& j, const Space& space,
                                       const std::string& where) {
  if (space.kind() == SpaceKind::discrete) {
    if (!j.is_number_integer())
      throw std::invalid_argument("config: " + where + " must be an integer symbol");
    return Point::symbol(j.get<std::int64_t>());
  }
  if (j.is_number()) {
    if (space.dim() != 1)
      throw std::invalid_argument("config: " + where + " must be an array of size " +
                                  std::to_string(space.dim()));
    return Point::real(j.get<double>());
  }
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != space.dim())
    throw std::invalid_argument("config: " + where + " must be an array of size " +
                                std::to_string(space.dim()));
  Eigen::VectorXd v(space.dim());
  for (Eigen::Index i = 0; i < space.dim(); ++i)
    v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return Point::vector(std::move(v));
}

[[nodiscard]] inline json point_json(const Point& p) {
  if (p.is_symbol()) return json(p.sym());
  json arr = json::array();
  for (Eigen::Index i = 0; i < p.vec().size(); ++i) arr.push_back(p.vec()[i]);
  return arr;
}

[[nodiscard]] inline ProcessSpec parse_process(const json& j, const Space& default_x,
                                               const Space& default_y,
                                               const std::string& where) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("config: " + where + " needs a process kind");
  const std::string kind = j.at("kind").get<std::string>();
  const Space sx =
      j.contains("space_x") ? parse_space(j.at("space_x"), where + ".space_x") : default_x;
  const Space sy =
      j.contains("space_y") ? parse_space(j.at("space_y"), where + ".space_y") : default_y;

  ProcessSpec spec{IidDiscreteSpec{}, sx, sy};
  if (kind == "iid_discrete") {
    detail::check_keys(j, {"kind", "space_x", "space_y", "atoms_x", "atoms_y", "weights"},
                       where);
    IidDiscreteSpec iid;
    for (const auto& a : j.at("atoms_x"))
      iid.atoms_x.push_back(parse_point(a, sx, where + ".atoms_x"));
    for (const auto& a : j.at("atoms_y"))
      iid.atoms_y.push_back(parse_point(a, sy, where + ".atoms_y"));
    iid.weights = j.at("weights").get<std::vector<double>>();
    spec.kind = std::move(iid);
  } else if (kind == "gaussian_copula") {
    detail::check_keys(j, {"kind", "space_x", "space_y", "rho"}, where);
    spec.kind = GaussianCopulaSpec{j.value("rho", 0.0)};
  } else if (kind == "markov_pair") {
    detail::check_keys(
        j, {"kind", "space_x", "space_y", "transition", "stationary", "emission_x",
            "emission_y"},
        where);
    MarkovPairSpec mk;
    const auto& rows = j.at("transition");
    if (!rows.is_array() || rows.empty())
      throw std::invalid_argument("config: " + where + ".transition must be a matrix");
    const auto m = static_cast<Eigen::Index>(rows.size());
    mk.transition.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& row = rows.at(static_cast<std::size_t>(i));
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
        throw std::invalid_argument("config: " + where + ".transition must be square");
      for (Eigen::Index c = 0; c < m; ++c)
        mk.transition(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    if (j.contains("stationary") && !j.at("stationary").is_null()) {
      const auto pi = j.at("stationary").get<std::vector<double>>();
      mk.stationary.resize(static_cast<Eigen::Index>(pi.size()));
      for (std::size_t i = 0; i < pi.size(); ++i)
        mk.stationary[static_cast<Eigen::Index>(i)] = pi[i];
    }
    for (const auto& a : j.at("emission_x"))
      mk.emit_x.push_back(parse_point(a, sx, where + ".emission_x"));
    for (const auto& a : j.at("emission_y"))
      mk.emit_y.push_back(parse_point(a, sy, where + ".emission_y"));
    spec.kind = std::move(mk);
  } else if (kind == "ar1_latent") {
    detail::check_keys(j, {"kind", "space_x", "space_y", "rho", "emission_x", "emission_y"},
                       where);
    Ar1LatentSpec ar;
    ar.rho = j.value("rho", 0.5);
    ar.emit_x = parse_ar1_emission(j.value("emission_x", std::string("identity")));
    ar.emit_y = parse_ar1_emission(j.value("emission_y", std::string("identity")));
    spec.kind = ar;
  } else if (kind == "independent_product") {
    detail::check_keys(j, {"kind", "space_x", "space_y", "x", "y"}, where);
    IndependentProductSpec prod;
    prod.x = std::make_shared<const ProcessSpec>(
        parse_process(j.at("x"), sx, sx, where + ".x"));
    prod.y = std::make_shared<const ProcessSpec>(
        parse_process(j.at("y"), sy, sy, where + ".y"));
    // spaces of the product are the x side of the first factor and the y
    // side of the second
    const Space px = prod.x->space_x;
    const Space py = prod.y->space_y;
    ProcessSpec out{std::move(prod), px, py};
    detail::validate_process(out);
    return out;
  } else {
    throw std::invalid_argument("config: unknown process kind '" + kind + "' in " + where);
  }
  detail::validate_process(spec);
  return spec;
}

[[nodiscard]] inline json process_json(const ProcessSpec& spec) {
  json j;
  j["space_x"] = space_json(spec.space_x);
  j["space_y"] = space_json(spec.space_y);
  if (const auto* iid = std::get_if<IidDiscreteSpec>(&spec.kind)) {
    j["kind"] = "iid_discrete";
    json ax = json::array();
    json ay = json::array();
    for (const auto& a : iid->atoms_x) ax.push_back(point_json(a));
    for (const auto& a : iid->atoms_y) ay.push_back(point_json(a));
    j["atoms_x"] = std::move(ax);
    j["atoms_y"] = std::move(ay);
    j["weights"] = iid->weights;
  } else if (const auto* cop = std::get_if<GaussianCopulaSpec>(&spec.kind)) {
    j["kind"] = "gaussian_copula";
    j["rho"] = cop->rho;
  } else if (const auto* mk = std::get_if<MarkovPairSpec>(&spec.kind)) {
    j["kind"] = "markov_pair";
    json rows = json::array();
    for (Eigen::Index i = 0; i < mk->transition.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < mk->transition.cols(); ++c)
        row.push_back(mk->transition(i, c));
      rows.push_back(std::move(row));
    }
    j["transition"] = std::move(rows);
    if (mk->stationary.size() != 0) {
      json pi = json::array();
      for (Eigen::Index i = 0; i < mk->stationary.size(); ++i)
        pi.push_back(mk->stationary[i]);
      j["stationary"] = std::move(pi);
    }
    json ex = json::array();
    json ey = json::array();
    for (const auto& a : mk->emit_x) ex.push_back(point_json(a));
    for (const auto& a : mk->emit_y) ey.push_back(point_json(a));
    j["emission_x"] = std::move(ex);
    j["emission_y"] = std::move(ey);
  } else if (const auto* ar = std::get_if<Ar1LatentSpec>(&spec.kind)) {
    j["kind"] = "ar1_latent";
    j["rho"] = ar->rho;
    j["emission_x"] = to_string(ar->emit_x);
    j["emission_y"] = to_string(ar->emit_y);
  } else if (const auto* prod = std::get_if<IndependentProductSpec>(&spec.kind)) {
    j["kind"] = "independent_product";
    j["x"] = process_json(*prod->x);
    j["y"] = process_json(*prod->y);
  }
  return j;
}

struct TestSettings {
  TestMethod method = TestMethod::spectral;
  std::size_t reps = 199;
  std::optional<std::size_t> bandwidth;
  std::optional<std::size_t> block_length;
  bool exact = false;
  bool paired_streams = false;
  TruncationPolicy truncation{};
};

struct ExperimentSettings {
  std::string kind;  // convergence | nulldist | varscaling
  std::vector<std::size_t> n_grid;
  std::size_t seeds = 50;       // convergence replications per grid cell
  std::size_t reps = 200;       // nulldist / varscaling replications
  std::size_t null_draws = 4000;
  bool raw = false;
  std::optional<std::size_t> bandwidth;
  TruncationPolicy truncation{};
};

struct InputSettings {
  std::string path;
  ColumnSelection columns;
};

struct Config {
  std::uint64_t seed = 0;
  std::size_t n = 0;  // sample size when simulating for compute/test
  std::optional<Space> space_x;
  std::optional<Space> space_y;
  std::optional<ProcessSpec> process;
  std::optional<InputSettings> input;
  TestSettings test;
  ExperimentSettings experiment;
  std::vector<std::size_t> lags;
};

[[nodiscard]] inline TestMethod parse_method(const std::string& name) {
  if (name == "spectral") return TestMethod::spectral;
  if (name == "block-bootstrap" || name == "block_bootstrap")
    return TestMethod::block_bootstrap;
  if (name == "permutation") return TestMethod::permutation;
  throw std::invalid_argument("unknown test method '" + name + "'");
}

[[nodiscard]] inline Config parse_config(const json& j) {
  detail::check_keys(j,
                     {"seed", "n", "space_x", "space_y", "process", "input", "test",
                      "experiment", "lags"},
                     "top level");
  Config cfg;
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.n = j.value("n", std::size_t{0});
  if (j.contains("space_x")) cfg.space_x = parse_space(j.at("space_x"), "space_x");
  if (j.contains("space_y")) cfg.space_y = parse_space(j.at("space_y"), "space_y");
  if (j.contains("process")) {
    if (!cfg.space_x || !cfg.space_y)
      throw std::invalid_argument(
          "config: a process block requires space_x and space_y");
    cfg.process = parse_process(j.at("process"), *cfg.space_x, *cfg.space_y, "process");
  }
  if (j.contains("input")) {
    const json& in = j.at("input");
    detail::check_keys(
        in, {"path", "x_columns", "y_columns", "x_symbolic", "y_symbolic"}, "input");
    InputSettings settings;
    settings.path = in.at("path").get<std::string>();
    settings.columns.x_columns = in.at("x_columns").get<std::vector<std::string>>();
    settings.columns.y_columns = in.at("y_columns").get<std::vector<std::string>>();
    settings.columns.x_symbolic = in.value("x_symbolic", false);
    settings.columns.y_symbolic = in.value("y_symbolic", false);
    cfg.input = std::move(settings);
  }
  if (j.contains("test")) {
    const json& t = j.at("test");
    detail::check_keys(t,
                       {"method", "reps", "bandwidth", "block_length", "exact",
                        "paired_streams", "trace_fraction", "max_components"},
                       "test");
    cfg.test.method = parse_method(t.value("method", std::string("spectral")));
    cfg.test.reps = t.value("reps", std::size_t{199});
    if (t.contains("bandwidth") && !t.at("bandwidth").is_null())
      cfg.test.bandwidth = t.at("bandwidth").get<std::size_t>();
    if (t.contains("block_length") && !t.at("block_length").is_null())
      cfg.test.block_length = t.at("block_length").get<std::size_t>();
    cfg.test.exact = t.value("exact", false);
    cfg.test.paired_streams = t.value("paired_streams", false);
    cfg.test.truncation.trace_fraction = t.value("trace_fraction", 0.999);
    cfg.test.truncation.max_components = t.value("max_components", std::size_t{100});
  }
  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    detail::check_keys(e,
                       {"kind", "n_grid", "seeds", "reps", "null_draws", "raw",
                        "bandwidth", "trace_fraction", "max_components"},
                       "experiment");
    cfg.experiment.kind = e.at("kind").get<std::string>();
    if (e.contains("n_grid"))
      cfg.experiment.n_grid = e.at("n_grid").get<std::vector<std::size_t>>();
    cfg.experiment.seeds = e.value("seeds", std::size_t{50});
    cfg.experiment.reps = e.value("reps", std::size_t{200});
    cfg.experiment.null_draws = e.value("null_draws", std::size_t{4000});
    cfg.experiment.raw = e.value("raw", false);
    if (e.contains("bandwidth") && !e.at("bandwidth").is_null())
      cfg.experiment.bandwidth = e.at("bandwidth").get<std::size_t>();
    cfg.experiment.truncation.trace_fraction = e.value("trace_fraction", 0.999);
    cfg.experiment.truncation.max_components = e.value("max_components", std::size_t{100});
  }
  if (j.contains("lags")) cfg.lags = j.at("lags").get<std::vector<std::size_t>>();
  return cfg;
}

[[nodiscard]] inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

// Canonical re-serialization with all defaults resolved; parse_config of
// this echo reproduces the configuration exactly.
[[nodiscard]] inline json config_json(const Config& cfg) {
  json j;
  j["seed"] = cfg.seed;
  if (cfg.n > 0) j["n"] = cfg.n;
  if (cfg.space_x) j["space_x"] = space_json(*cfg.space_x);
  if (cfg.space_y) j["space_y"] = space_json(*cfg.space_y);
  if (cfg.process) j["process"] = process_json(*cfg.process);
  if (cfg.input) {
    json in;
    in["path"] = cfg.input->path;
    in["x_columns"] = cfg.input->columns.x_columns;
    in["y_columns"] = cfg.input->columns.y_columns;
    in["x_symbolic"] = cfg.input->columns.x_symbolic;
    in["y_symbolic"] = cfg.input->columns.y_symbolic;
    j["input"] = std::move(in);
  }
  {
    json t;
    t["method"] = to_string(cfg.test.method);
    t["reps"] = cfg.test.reps;
    if (cfg.test.bandwidth) t["bandwidth"] = *cfg.test.bandwidth;
    if (cfg.test.block_length) t["block_length"] = *cfg.test.block_length;
    t["exact"] = cfg.test.exact;
    t["paired_streams"] = cfg.test.paired_streams;
    t["trace_fraction"] = cfg.test.truncation.trace_fraction;
    t["max_components"] = cfg.test.truncation.max_components;
    j["test"] = std::move(t);
  }
  if (!cfg.experiment.kind.empty()) {
    json e;
    e["kind"] = cfg.experiment.kind;
    e["n_grid"] = cfg.experiment.n_grid;
    e["seeds"] = cfg.experiment.seeds;
    e["reps"] = cfg.experiment.reps;
    e["null_draws"] = cfg.experiment.null_draws;
    e["raw"] = cfg.experiment.raw;
    if (cfg.experiment.bandwidth) e["bandwidth"] = *cfg.experiment.bandwidth;
    e["trace_fraction"] = cfg.experiment.truncation.trace_fraction;
    e["max_components"] = cfg.experiment.truncation.max_components;
    j["experiment"] = std::move(e);
  }
  if (!cfg.lags.empty()) j["lags"] = cfg.lags;
  return j;
}

}  // namespace dcv
