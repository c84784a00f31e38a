#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcut/analytical.hpp"
#include "netcut/csv.hpp"
#include "netcut/error.hpp"
#include "netcut/evaluator.hpp"
#include "netcut/netmodel.hpp"
#include "netcut/profile.hpp"
#include "netcut/truth.hpp"

// Run configuration: one JSON file naming every input of a run. Relative
// paths resolve against the directory holding the config file.
//
//   {
//     "networks": [{"descriptor": "...json", "profile": "...csv|json"}],
//     "evaluator": {"backend": "table", "table_path": "...", "interpolate": false}
//               | {"backend": "external", "command": "...", "timeout_s": 600, "parallelism": 1},
//     "ground_truth": "...csv",            optional
//     "estimator": "profiler" | "analytical" | "both",
//     "analytical": {"gamma_grid": [], "c_grid": [], "folds": 10, "epsilon": 0.01,
//                    "train_fraction": 0.2, "kernel": "rbf", "model_path": "..."},
//     "deadline_ms": 0.9,
//     "granularity": "block" | "layer",
//     "output_dir": "out",
//     "unit_cost_hours": 1.2365,
//     "jobs": 1,
//     "seed": 0                            reserved, every default is deterministic
//   }
namespace netcut {

enum class EstimatorChoice { Profiler, Analytical, Both };

inline EstimatorChoice parse_estimator(const std::string& s) {
  if (s == "profiler") return EstimatorChoice::Profiler;
  if (s == "analytical") return EstimatorChoice::Analytical;
  if (s == "both") return EstimatorChoice::Both;
  throw ConfigError("unknown estimator '" + s + "' (expected profiler, analytical or both)");
}

inline const char* to_string(EstimatorChoice e) {
  switch (e) {
    case EstimatorChoice::Profiler: return "profiler";
    case EstimatorChoice::Analytical: return "analytical";
    case EstimatorChoice::Both: return "both";
  }
  return "?";
}

struct AnalyticalOptions {
  std::vector<double> gamma_grid = default_gamma_grid();
  std::vector<double> c_grid = default_c_grid();
  std::size_t folds = kDefaultFolds;
  double epsilon = kDefaultEpsilonMs;
  double train_fraction = 0.2;
  svr::Kernel kernel = svr::Kernel::Rbf;
  std::optional<std::string> model_path;
};

struct NetworkEntry {
  std::string descriptor;
  std::string profile;
};

struct RunConfig {
  std::filesystem::path base_dir = ".";
  std::vector<NetworkEntry> networks;
  EvaluatorConfig evaluator;
  bool has_evaluator = false;
  std::optional<std::string> ground_truth;
  EstimatorChoice estimator = EstimatorChoice::Profiler;
  AnalyticalOptions analytical;
  std::optional<double> deadline_ms;
  Granularity granularity = Granularity::Blockwise;
  std::string output_dir = "out";
  double unit_cost_hours = 183.0 / 148.0;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;

  std::string resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal().string();
  }
};

namespace detail {

template <class T>
T get_as(const nlohmann::json& j, const char* key, const std::string& ctx) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(ctx + ": field '" + key + "' is missing or has the wrong type");
  }
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& ctx) {
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(ctx + ": unknown field '" + k + "'");
  }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                  const std::string& ctx = "config") {
  if (!j.is_object()) throw ConfigError(ctx + ": top level must be a JSON object");
  detail::reject_unknown(j,
                         {"networks", "evaluator", "ground_truth", "estimator", "analytical", "deadline_ms",
                          "granularity", "output_dir", "unit_cost_hours", "jobs", "seed"},
                         ctx);
  RunConfig c;
  c.base_dir = base_dir;
  if (j.contains("networks")) {
    if (!j["networks"].is_array()) throw ConfigError(ctx + ": 'networks' must be an array");
    for (const auto& n : j["networks"]) {
      c.networks.push_back({detail::get_as<std::string>(n, "descriptor", ctx + ": networks[]"),
                            detail::get_as<std::string>(n, "profile", ctx + ": networks[]")});
    }
  }
  if (j.contains("evaluator")) {
    const auto& e = j["evaluator"];
    const auto ectx = ctx + ": evaluator";
    detail::reject_unknown(e, {"backend", "table_path", "interpolate", "command", "timeout_s", "parallelism"}, ectx);
    const auto backend = detail::get_as<std::string>(e, "backend", ectx);
    if (backend == "table") {
      c.evaluator.backend = EvaluatorBackend::Table;
    } else if (backend == "external") {
      c.evaluator.backend = EvaluatorBackend::External;
    } else {
      throw ConfigError(ectx + ": unknown backend '" + backend + "'");
    }
    if (e.contains("table_path")) c.evaluator.table_path = detail::get_as<std::string>(e, "table_path", ectx);
    if (e.contains("interpolate")) c.evaluator.interpolate = detail::get_as<bool>(e, "interpolate", ectx);
    if (e.contains("command")) c.evaluator.command = detail::get_as<std::string>(e, "command", ectx);
    if (e.contains("timeout_s")) c.evaluator.timeout_s = detail::get_as<double>(e, "timeout_s", ectx);
    if (e.contains("parallelism")) c.evaluator.parallelism = detail::get_as<std::size_t>(e, "parallelism", ectx);
    c.evaluator.validate();
    c.has_evaluator = true;
  }
  if (j.contains("ground_truth") && !j["ground_truth"].is_null()) {
    c.ground_truth = detail::get_as<std::string>(j, "ground_truth", ctx);
  }
  if (j.contains("estimator")) c.estimator = parse_estimator(detail::get_as<std::string>(j, "estimator", ctx));
  if (j.contains("analytical")) {
    const auto& a = j["analytical"];
    const auto actx = ctx + ": analytical";
    detail::reject_unknown(a, {"gamma_grid", "c_grid", "folds", "epsilon", "train_fraction", "kernel", "model_path"},
                           actx);
    auto& o = c.analytical;
    if (a.contains("gamma_grid")) o.gamma_grid = detail::get_as<std::vector<double>>(a, "gamma_grid", actx);
    if (a.contains("c_grid")) o.c_grid = detail::get_as<std::vector<double>>(a, "c_grid", actx);
    if (a.contains("folds")) o.folds = detail::get_as<std::size_t>(a, "folds", actx);
    if (a.contains("epsilon")) o.epsilon = detail::get_as<double>(a, "epsilon", actx);
    if (a.contains("train_fraction")) o.train_fraction = detail::get_as<double>(a, "train_fraction", actx);
    if (a.contains("kernel")) o.kernel = svr::parse_kernel(detail::get_as<std::string>(a, "kernel", actx));
    if (a.contains("model_path") && !a["model_path"].is_null()) {
      o.model_path = detail::get_as<std::string>(a, "model_path", actx);
    }
    if (o.gamma_grid.empty() || o.c_grid.empty()) throw ConfigError(actx + ": grids must be non-empty");
    if (o.folds < 2) throw ConfigError(actx + ": folds must be >= 2");
    if (!(o.epsilon >= 0)) throw ConfigError(actx + ": epsilon must be >= 0");
    if (!(o.train_fraction > 0 && o.train_fraction <= 1)) throw ConfigError(actx + ": train_fraction must be in (0, 1]");
  }
  if (j.contains("deadline_ms") && !j["deadline_ms"].is_null()) {
    c.deadline_ms = detail::get_as<double>(j, "deadline_ms", ctx);
    if (!(*c.deadline_ms > 0)) throw ConfigError(ctx + ": deadline_ms must be > 0");
  }
  if (j.contains("granularity")) c.granularity = parse_granularity(detail::get_as<std::string>(j, "granularity", ctx));
  if (j.contains("output_dir")) c.output_dir = detail::get_as<std::string>(j, "output_dir", ctx);
  if (j.contains("unit_cost_hours")) {
    c.unit_cost_hours = detail::get_as<double>(j, "unit_cost_hours", ctx);
    if (!(c.unit_cost_hours > 0)) throw ConfigError(ctx + ": unit_cost_hours must be > 0");
  }
  if (j.contains("jobs")) c.jobs = std::max<std::size_t>(1, detail::get_as<std::size_t>(j, "jobs", ctx));
  if (j.contains("seed")) c.seed = detail::get_as<std::uint64_t>(j, "seed", ctx);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": JSON parse error: " + e.what());
  }
  return config_from_json(j, std::filesystem::path(path).parent_path(), path);
}

// Every input of a run, loaded and cross-checked.
struct Workspace {
  RunConfig config;
  std::vector<NetworkDescriptor> nets;
  std::vector<ProfileTable> profiles;
  std::optional<GroundTruth> truth;

  const NetworkDescriptor& net(const std::string& name) const {
    for (const auto& n : nets)
      if (n.name == name) return n;
    throw ConfigError("unknown network '" + name + "'");
  }
  const ProfileTable& profile(const std::string& name) const {
    for (const auto& p : profiles)
      if (p.network == name) return p;
    throw ConfigError("no profile for network '" + name + "'");
  }
};

inline void require_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::is_regular_file(path)) throw ConfigError(what + " '" + path + "' does not exist");
}

// Checks ground-truth keys against the loaded descriptors.
inline void check_truth(const GroundTruth& truth, const std::vector<NetworkDescriptor>& nets) {
  for (const auto& [key, v] : truth.latency_ms) {
    auto it = std::find_if(nets.begin(), nets.end(), [&](const NetworkDescriptor& n) { return n.name == key.first; });
    if (it == nets.end()) throw ValidationError("ground truth names unknown network '" + key.first + "'");
    if (key.second >= it->layer_count()) {
      throw ValidationError("ground truth cutpoint " + std::to_string(key.second) + " out of range for network '" +
                            key.first + "'");
    }
  }
}

inline Workspace load_workspace(const RunConfig& cfg) {
  Workspace ws;
  ws.config = cfg;
  for (const auto& e : cfg.networks) {
    const auto dpath = cfg.resolve(e.descriptor);
    const auto ppath = cfg.resolve(e.profile);
    require_file(dpath, "descriptor");
    require_file(ppath, "profile");
    auto net = load_descriptor(dpath);
    for (const auto& other : ws.nets) {
      if (other.name == net.name) throw ValidationError("network '" + net.name + "' listed twice");
    }
    ws.profiles.push_back(load_profile(ppath, net));
    ws.nets.push_back(std::move(net));
  }
  if (cfg.ground_truth) {
    const auto tpath = cfg.resolve(*cfg.ground_truth);
    require_file(tpath, "ground truth");
    ws.truth = load_ground_truth(tpath);
    check_truth(*ws.truth, ws.nets);
  }
  return ws;
}

// Evaluator config with its table path resolved against the config directory.
inline EvaluatorConfig resolved_evaluator(const RunConfig& cfg) {
  if (!cfg.has_evaluator) throw ConfigError("config has no 'evaluator' section");
  auto e = cfg.evaluator;
  if (e.backend == EvaluatorBackend::Table) {
    e.table_path = cfg.resolve(e.table_path);
    require_file(e.table_path, "accuracy table");
  }
  return e;
}

}  // namespace netcut
