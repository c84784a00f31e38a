#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "netcut/explorer.hpp"

// Slow, obviously-correct reference implementations.
namespace netcut::oracle {

// O(n^2) dominance filter; distinct (latency, accuracy) pairs sorted by latency.
inline std::vector<std::pair<double, double>> pareto_brute_force(const std::vector<ParetoPoint>& pts) {
  std::set<std::pair<double, double>> keep;
  for (const auto& p : pts) {
    bool dominated = false;
    for (const auto& q : pts) {
      if (q.latency_ms <= p.latency_ms && q.accuracy >= p.accuracy &&
          (q.latency_ms < p.latency_ms || q.accuracy > p.accuracy)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) keep.emplace(p.latency_ms, p.accuracy);
  }
  return {keep.begin(), keep.end()};
}

inline std::vector<std::pair<double, double>> coordinates(const std::vector<ParetoPoint>& pts) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : pts) out.emplace_back(p.latency_ms, p.accuracy);
  return out;
}

// Latency of every candidate of `net`, in cutpoint order, as the explorer sees it.
inline std::vector<std::pair<std::size_t, double>> candidate_latencies(const NetworkDescriptor& net,
                                                                        const ProfileTable& table,
                                                                        const LatencyEstimator& est, Granularity g) {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& trn : enumerate(net, g)) {
    out.emplace_back(trn.cutpoint, trn.cutpoint == 0 ? table.measured_latency_ms : est(net, table, trn).value_ms);
  }
  return out;
}

// Smallest feasible cutpoint by exhaustive scan, or nullopt.
inline std::optional<std::size_t> first_feasible(const std::vector<std::pair<std::size_t, double>>& lat,
                                                 double deadline) {
  std::optional<std::size_t> best;
  for (const auto& [cut, ms] : lat) {
    if (ms <= deadline && (!best || cut < *best)) best = cut;
  }
  return best;
}

}  // namespace netcut::oracle
