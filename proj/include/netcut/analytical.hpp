#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcut/error.hpp"
#include "netcut/netmodel.hpp"
#include "netcut/parallel.hpp"
#include "netcut/profile.hpp"
#include "netcut/svr.hpp"
#include "netcut/truth.hpp"

// Device-agnostic latency model: high-level features of a trimmed network fed
// to an epsilon-SVR, with grid-search tuning over k folds.
namespace netcut {

// Totals over the layers a TRN keeps, plus the source network's measured
// latency.
struct FeatureVector {
  double original_latency_ms = 0;
  double total_flops = 0;
  double total_params = 0;
  double layer_count = 0;
  double total_filter_size = 0;

  static constexpr std::size_t kSize = 5;

  std::array<double, kSize> values() const {
    return {original_latency_ms, total_flops, total_params, layer_count, total_filter_size};
  }
  std::vector<double> to_vector() const {
    auto a = values();
    return {a.begin(), a.end()};
  }
};

inline FeatureVector extract_features(const NetworkDescriptor& net, const ProfileTable& table,
                                      const TrimmedNetworkSpec& trn) {
  if (trn.source != net.name || table.network != net.name) {
    throw ConfigError("feature extraction: TRN '" + trn.source + "', descriptor '" + net.name + "' and profile '" +
                      table.network + "' must name the same network");
  }
  if (trn.cutpoint >= net.layer_count()) {
    throw ConfigError("feature extraction: cutpoint " + std::to_string(trn.cutpoint) + " leaves no layer in '" +
                      net.name + "'");
  }
  FeatureVector f;
  f.original_latency_ms = table.measured_latency_ms;
  for (std::size_t i = trn.cutpoint; i < net.layer_count(); ++i) {
    const auto& l = net.layers[i];
    f.total_flops += static_cast<double>(l.flops);
    f.total_params += static_cast<double>(l.params);
    f.total_filter_size += static_cast<double>(l.filter_size);
  }
  f.layer_count = static_cast<double>(net.layer_count() - trn.cutpoint);
  return f;
}

// 100 * |pred - truth| / truth.
inline double relative_error(double pred_ms, double truth_ms) {
  if (!(truth_ms > 0)) throw ConfigError("relative error needs a positive ground truth");
  return 100.0 * std::abs(pred_ms - truth_ms) / truth_ms;
}

struct TrainingSample {
  FeatureVector features;
  double latency_ms = 0;
  std::string network;  // provenance only
  std::size_t cutpoint = 0;
};

// Trains on the given samples with a fixed hyperparameter pair.
inline svr::Model train_svr(const std::vector<TrainingSample>& data, const svr::Params& prm) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  x.reserve(data.size());
  y.reserve(data.size());
  for (const auto& s : data) {
    x.push_back(s.features.to_vector());
    y.push_back(s.latency_ms);
  }
  return svr::train(x, y, prm);
}

// Regression output clamped at zero; flags queries outside the per-component
// training range.
inline LatencyEstimate predict(const svr::Model& model, const FeatureVector& f, const TrimmedNetworkSpec& trn = {}) {
  const auto v = f.to_vector();
  return {std::max(0.0, model.predict(v)), EstimateMethod::Analytical, trn, model.outside_training_range(v)};
}

// ---------------------------------------------------------------------------
// Cross-validation and grid search

struct GridCell {
  double gamma = 0;
  double c = 0;
  double mean_cv_error_pct = std::numeric_limits<double>::quiet_NaN();
  std::size_t unconverged_folds = 0;  // fold fits that hit the iteration limit
};

struct TuningReport {
  svr::Kernel kernel = svr::Kernel::Rbf;
  std::size_t fold_count = 0;
  double epsilon = 0;
  std::vector<GridCell> grid;  // evaluation order: gamma ascending, then C
  GridCell selected;
};

inline nlohmann::json to_json(const TuningReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.grid) {
    cells.push_back({{"gamma", c.gamma},
                     {"c", c.c},
                     {"mean_cv_error_pct", c.mean_cv_error_pct},
                     {"unconverged_folds", c.unconverged_folds}});
  }
  return {{"kernel", svr::to_string(r.kernel)},
          {"fold_count", r.fold_count},
          {"epsilon", r.epsilon},
          {"grid", cells},
          {"selected",
           {{"gamma", r.selected.gamma}, {"c", r.selected.c}, {"mean_cv_error_pct", r.selected.mean_cv_error_pct}}}};
}

struct TuningResult {
  TuningReport report;
  svr::Model model;  // retrained on all data with the selected cell
};

// Round-robin fold ids over samples sorted by target (stable on ties).
inline std::vector<std::size_t> assign_folds(const std::vector<TrainingSample>& data, std::size_t k) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data[a].latency_ms < data[b].latency_ms; });
  std::vector<std::size_t> fold(data.size());
  for (std::size_t p = 0; p < order.size(); ++p) fold[order[p]] = p % k;
  return fold;
}

// Mean absolute relative error (percent) over held-out predictions, each
// sample held out exactly once.
inline double cross_validate(const std::vector<TrainingSample>& data, const svr::Params& prm, std::size_t k,
                             std::size_t* unconverged = nullptr) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (data.size() < k) {
    throw ConfigError("cross-validation: " + std::to_string(data.size()) + " samples are fewer than " +
                      std::to_string(k) + " folds");
  }
  const auto fold = assign_folds(data, k);
  double err_sum = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<TrainingSample> train;
    std::vector<const TrainingSample*> held;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold[i] == f) held.push_back(&data[i]); else train.push_back(data[i]);
    }
    const auto model = train_svr(train, prm);
    if (unconverged && !model.converged) ++*unconverged;
    for (const auto* s : held) err_sum += relative_error(predict(model, s->features).value_ms, s->latency_ms);
  }
  return err_sum / static_cast<double>(data.size());
}

// Cartesian product, ordered gamma ascending then C ascending.
inline std::vector<GridCell> make_grid(std::vector<double> gammas, std::vector<double> cs) {
  std::sort(gammas.begin(), gammas.end());
  std::sort(cs.begin(), cs.end());
  std::vector<GridCell> out;
  for (double g : gammas)
    for (double c : cs) out.push_back({g, c});
  return out;
}

inline std::vector<double> default_gamma_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 10.0}; }
inline std::vector<double> default_c_grid() { return {1.0, 1e2, 1e4, 1e6}; }
inline constexpr std::size_t kDefaultFolds = 10;
inline constexpr double kDefaultEpsilonMs = 0.01;

// Evaluates every cell by k-fold CV, selects the minimum mean relative error
// (ties: smaller gamma, then smaller C) and retrains on all data.
inline TuningResult grid_search_cv(const std::vector<TrainingSample>& data, std::vector<GridCell> cells,
                                   double epsilon, std::size_t folds, svr::Kernel kernel = svr::Kernel::Rbf,
                                   std::size_t jobs = 1) {
  if (cells.empty()) throw ConfigError("grid search: empty grid");
  if (folds < 2) throw ConfigError("grid search: need at least 2 folds");
  if (data.size() < folds) {
    throw ConfigError("grid search: " + std::to_string(data.size()) + " samples are fewer than " +
                      std::to_string(folds) + " folds");
  }
  for (const auto& s : data) {
    if (!(s.latency_ms > 0)) throw ValidationError("grid search: training latencies must be positive");
  }
  std::stable_sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    return a.gamma != b.gamma ? a.gamma < b.gamma : a.c < b.c;
  });

  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    svr::Params prm;
    prm.kernel = kernel;
    prm.gamma = cells[i].gamma;
    prm.c = cells[i].c;
    prm.epsilon = epsilon;
    cells[i].mean_cv_error_pct = cross_validate(data, prm, folds, &cells[i].unconverged_folds);
  });

  // A truncated fit scores an arbitrary iterate rather than the cell's model,
  // so cells with any unconverged fold rank after every converged cell.
  auto better = [](const GridCell& a, const GridCell& b) {
    if ((a.unconverged_folds == 0) != (b.unconverged_folds == 0)) return a.unconverged_folds == 0;
    return a.mean_cv_error_pct < b.mean_cv_error_pct;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (better(cells[i], cells[best])) best = i;
  }

  TuningResult out;
  out.report.kernel = kernel;
  out.report.fold_count = folds;
  out.report.epsilon = epsilon;
  out.report.grid = cells;
  out.report.selected = cells[best];
  svr::Params prm;
  prm.kernel = kernel;
  prm.gamma = cells[best].gamma;
  prm.c = cells[best].c;
  prm.epsilon = epsilon;
  out.model = train_svr(data, prm);
  return out;
}

// ---------------------------------------------------------------------------
// Data assembly

// One sample per ground-truth row whose network has a descriptor and profile.
// Rows naming unknown networks or out-of-range cutpoints are rejected.
inline std::vector<TrainingSample> build_samples(const std::vector<NetworkDescriptor>& nets,
                                                 const std::vector<ProfileTable>& tables, const GroundTruth& truth) {
  std::vector<TrainingSample> out;
  for (const auto& [key, latency] : truth.latency_ms) {
    const auto& [name, cut] = key;
    auto nit = std::find_if(nets.begin(), nets.end(), [&](const NetworkDescriptor& n) { return n.name == name; });
    auto tit = std::find_if(tables.begin(), tables.end(), [&](const ProfileTable& t) { return t.network == name; });
    if (nit == nets.end() || tit == tables.end()) {
      throw ValidationError("ground truth names unknown network '" + name + "'");
    }
    if (cut >= nit->layer_count()) {
      throw ValidationError("ground truth cutpoint " + std::to_string(cut) + " out of range for '" + name + "'");
    }
    out.push_back({extract_features(*nit, *tit, {name, cut, Granularity::Layerwise}), latency, name, cut});
  }
  return out;
}

// Deterministic split: samples sorted by latency, every position p with
// floor((p+1)f) > floor(pf) goes to the training side. This spreads the
// training share evenly across the latency range.
inline std::pair<std::vector<TrainingSample>, std::vector<TrainingSample>> split_train_test(
    const std::vector<TrainingSample>& data, double train_fraction) {
  if (!(train_fraction > 0) || train_fraction > 1) throw ConfigError("train fraction must be in (0, 1]");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data[a].latency_ms < data[b].latency_ms; });
  std::pair<std::vector<TrainingSample>, std::vector<TrainingSample>> out;
  for (std::size_t p = 0; p < order.size(); ++p) {
    const bool train = std::floor((p + 1) * train_fraction) > std::floor(p * train_fraction);
    (train ? out.first : out.second).push_back(data[order[p]]);
  }
  return out;
}

inline double mean_relative_error(const svr::Model& model, const std::vector<TrainingSample>& data) {
  if (data.empty()) return 0;
  double s = 0;
  for (const auto& d : data) s += relative_error(predict(model, d.features).value_ms, d.latency_ms);
  return s / static_cast<double>(data.size());
}

}  // namespace netcut
