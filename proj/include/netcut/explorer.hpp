#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "netcut/analytical.hpp"
#include "netcut/error.hpp"
#include "netcut/evaluator.hpp"
#include "netcut/metrics.hpp"
#include "netcut/netmodel.hpp"
#include "netcut/parallel.hpp"
#include "netcut/profile.hpp"
#include "netcut/truth.hpp"

// Deadline-driven exploration of trimmed networks.
namespace netcut {

struct Deadline {
  double ms = 0;

  explicit Deadline(double v) : ms(v) {
    if (!(v > 0)) throw ConfigError("deadline must be > 0 ms");
  }
};

// Latency of a TRN given its source descriptor and profile.
using LatencyEstimator =
    std::function<LatencyEstimate(const NetworkDescriptor&, const ProfileTable&, const TrimmedNetworkSpec&)>;

inline LatencyEstimator profiler_estimator() {
  return [](const NetworkDescriptor&, const ProfileTable& t, const TrimmedNetworkSpec& trn) {
    return estimate_profiler(t, trn);
  };
}

inline LatencyEstimator analytical_estimator(std::shared_ptr<const svr::Model> model) {
  return [model = std::move(model)](const NetworkDescriptor& net, const ProfileTable& t, const TrimmedNetworkSpec& trn) {
    return predict(*model, extract_features(net, t, trn), trn);
  };
}

// Pairs every descriptor with its profile, by network name.
inline std::vector<const ProfileTable*> match_profiles(const std::vector<NetworkDescriptor>& nets,
                                                       const std::vector<ProfileTable>& tables) {
  std::vector<const ProfileTable*> out;
  for (const auto& n : nets) {
    auto it = std::find_if(tables.begin(), tables.end(), [&](const ProfileTable& t) { return t.network == n.name; });
    if (it == tables.end()) throw ConfigError("no profile for network '" + n.name + "'");
    out.push_back(&*it);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pareto frontier

struct ParetoPoint {
  TrimmedNetworkSpec trn;
  double latency_ms = 0;
  EstimateMethod latency_source = EstimateMethod::Measured;
  double accuracy = 0;
};

inline bool dominates(const ParetoPoint& p, const ParetoPoint& q) {
  return p.latency_ms <= q.latency_ms && p.accuracy >= q.accuracy &&
         (p.latency_ms < q.latency_ms || p.accuracy > q.accuracy);
}

// Non-dominated points sorted by latency ascending. Exact duplicates in
// (latency, accuracy) collapse to the first by (network, cutpoint).
inline std::vector<ParetoPoint> pareto_frontier(std::vector<ParetoPoint> points) {
  std::sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return std::tie(a.latency_ms, b.accuracy, a.trn.source, a.trn.cutpoint) <
           std::tie(b.latency_ms, a.accuracy, b.trn.source, b.trn.cutpoint);
  });
  std::vector<ParetoPoint> out;
  for (auto& p : points) {
    if (out.empty() || p.accuracy > out.back().accuracy) out.push_back(std::move(p));
  }
  return out;
}

struct GapAnalysis {
  bool feasible = false;
  std::optional<ParetoPoint> best;        // max-accuracy point within the deadline
  std::optional<double> slack_ms;         // deadline - best latency
  std::optional<ParetoPoint> next_above;  // cheapest frontier point past the deadline
  double accuracy_gap = 0;                // next_above accuracy - best accuracy
};

inline GapAnalysis gap_analysis(const std::vector<ParetoPoint>& frontier, Deadline deadline) {
  if (frontier.empty()) throw ConfigError("gap analysis needs a non-empty frontier");
  GapAnalysis g;
  for (const auto& p : frontier) {
    if (p.latency_ms <= deadline.ms) {
      if (!g.best || p.accuracy > g.best->accuracy) g.best = p;
    } else if (!g.next_above || p.latency_ms < g.next_above->latency_ms) {
      g.next_above = p;
    }
  }
  g.feasible = g.best.has_value();
  if (g.best) g.slack_ms = deadline.ms - g.best->latency_ms;
  if (g.best && g.next_above) g.accuracy_gap = g.next_above->accuracy - g.best->accuracy;
  return g;
}

// ---------------------------------------------------------------------------
// NetCut

struct NetworkChoice {
  std::string network;
  bool feasible = false;
  TrimmedNetworkSpec trn;  // chosen TRN (meaningful when feasible)
  double latency_ms = 0;
  EstimateMethod latency_source = EstimateMethod::Measured;
  bool extrapolated = false;
  double accuracy = 0;
  std::size_t candidates_scanned = 0;
  double original_latency_ms = 0;
};

struct ExplorationReport {
  double deadline_ms = 0;
  std::string estimator;
  Granularity granularity = Granularity::Blockwise;
  std::vector<NetworkChoice> networks;    // input order
  std::optional<NetworkChoice> winner;
  std::optional<NetworkChoice> off_the_shelf;  // best unmodified network within the deadline
  std::size_t candidates_trained = 0;
  std::size_t baseline_candidates = 0;  // blockwise TRNs over all networks
  double unit_cost_hours = 0;
  std::optional<ExplorationCost> cost;
  std::optional<double> slack_ms;
  std::optional<double> gap_closed_pct;
  std::vector<ParetoPoint> points;  // evaluated TRNs
  std::vector<ParetoPoint> frontier;
};

struct NetcutOptions {
  std::size_t jobs = 1;
  double unit_cost_hours = 183.0 / 148.0;
  std::string estimator_name = "profiler";
};

// First TRN of `net`, in increasing cutpoint order, whose latency meets the
// deadline. Cutpoint 0 uses the measured latency; later cutpoints use the
// estimator.
inline NetworkChoice scan_network(const NetworkDescriptor& net, const ProfileTable& table,
                                  const LatencyEstimator& estimate, Deadline deadline, Granularity g) {
  NetworkChoice c;
  c.network = net.name;
  c.original_latency_ms = table.measured_latency_ms;
  const auto candidates = enumerate(net, g);
  for (const auto& trn : candidates) {
    ++c.candidates_scanned;
    LatencyEstimate est;
    if (trn.cutpoint == 0) {
      est = {table.measured_latency_ms, EstimateMethod::Measured, trn, false};
    } else {
      est = estimate(net, table, trn);
    }
    if (est.value_ms <= deadline.ms) {
      c.feasible = true;
      c.trn = trn;
      c.latency_ms = est.value_ms;
      c.latency_source = est.method;
      c.extrapolated = est.extrapolated;
      return c;
    }
  }
  return c;
}

inline std::size_t count_blockwise_candidates(const std::vector<NetworkDescriptor>& nets) {
  std::size_t n = 0;
  for (const auto& net : nets) n += enumerate_blockwise(net).size();
  return n;
}

// Chooses one TRN per network, evaluates only those, and picks the most
// accurate. Accuracy ties go to lower latency, then network name.
inline ExplorationReport netcut(const std::vector<NetworkDescriptor>& nets, const std::vector<ProfileTable>& tables,
                                const LatencyEstimator& estimate, Deadline deadline, const Evaluator& evaluator,
                                Granularity g, const NetcutOptions& opt = {}) {
  const auto profiles = match_profiles(nets, tables);
  ExplorationReport r;
  r.deadline_ms = deadline.ms;
  r.estimator = opt.estimator_name;
  r.granularity = g;
  r.unit_cost_hours = opt.unit_cost_hours;
  r.networks.resize(nets.size());

  parallel_for(nets.size(), opt.jobs, [&](std::size_t i) {
    auto c = scan_network(nets[i], *profiles[i], estimate, deadline, g);
    if (c.feasible) c.accuracy = evaluator.evaluate(c.trn).value;
    r.networks[i] = std::move(c);
  });

  for (const auto& c : r.networks) {
    if (!c.feasible) continue;
    ++r.candidates_trained;
    r.points.push_back({c.trn, c.latency_ms, c.latency_source, c.accuracy});
    auto better = [](const NetworkChoice& a, const std::optional<NetworkChoice>& b) {
      if (!b) return true;
      if (a.accuracy != b->accuracy) return a.accuracy > b->accuracy;
      if (a.latency_ms != b->latency_ms) return a.latency_ms < b->latency_ms;
      return a.network < b->network;
    };
    if (better(c, r.winner)) r.winner = c;
    if (c.trn.cutpoint == 0 && better(c, r.off_the_shelf)) r.off_the_shelf = c;
  }
  r.frontier = pareto_frontier(r.points);
  r.baseline_candidates = count_blockwise_candidates(nets);
  if (r.candidates_trained > 0) {
    r.cost = exploration_cost(r.baseline_candidates, r.candidates_trained, opt.unit_cost_hours);
  }
  if (r.winner) {
    r.slack_ms = deadline.ms - r.winner->latency_ms;
    if (r.off_the_shelf && r.off_the_shelf->accuracy > 0) {
      r.gap_closed_pct = relative_improvement(r.winner->accuracy, r.off_the_shelf->accuracy);
    }
  }
  return r;
}

// Every blockwise TRN of every network, evaluated. Latencies come from the
// ground truth when it has the TRN, from the measurement at cutpoint 0, and
// from the profiler estimate otherwise.
inline std::vector<ParetoPoint> explore_blockwise(const std::vector<NetworkDescriptor>& nets,
                                                  const std::vector<ProfileTable>& tables, const Evaluator& evaluator,
                                                  const GroundTruth* truth = nullptr, std::size_t jobs = 1) {
  const auto profiles = match_profiles(nets, tables);
  std::vector<ParetoPoint> points;
  for (std::size_t i = 0; i < nets.size(); ++i) {
    for (const auto& trn : enumerate_blockwise(nets[i])) {
      ParetoPoint p{trn, 0, EstimateMethod::Measured, 0};
      if (const double* t = truth ? truth->find(trn.source, trn.cutpoint) : nullptr) {
        p.latency_ms = *t;
      } else if (trn.cutpoint == 0) {
        p.latency_ms = profiles[i]->measured_latency_ms;
      } else {
        p.latency_ms = estimate_profiler(*profiles[i], trn).value_ms;
        p.latency_source = EstimateMethod::Profiler;
      }
      points.push_back(std::move(p));
    }
  }
  // Evaluate everything first so every coverage gap is reported at once.
  std::vector<std::optional<EvaluatorError>> errors(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t k) {
    try {
      points[k].accuracy = evaluator.evaluate(points[k].trn).value;
    } catch (const EvaluatorError& e) {
      errors[k] = e;
    }
  });
  std::string msg;
  std::optional<EvaluatorError::Kind> first_kind;
  std::size_t failed = 0;
  for (const auto& e : errors) {
    if (!e) continue;
    if (!first_kind) first_kind = e->kind();
    ++failed;
    msg += "\n  ";
    msg += e->what();
  }
  if (first_kind) {
    throw EvaluatorError(*first_kind, std::to_string(failed) + " of " + std::to_string(points.size()) +
                                          " blockwise TRNs could not be evaluated:" + msg);
  }
  return points;
}

}  // namespace netcut
