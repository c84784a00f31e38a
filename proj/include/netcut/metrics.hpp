#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "netcut/error.hpp"

namespace netcut {

// Class-probability vector of one sample (e.g. five grasp types).
struct GraspDistribution {
  std::vector<double> probabilities;

  // Throws unless every component is >= 0 and the sum is 1 within 1e-6.
  void validate() const {
    if (probabilities.empty()) throw ValidationError("distribution is empty");
    double sum = 0;
    for (double p : probabilities) {
      if (!(p >= 0) || !std::isfinite(p)) throw ValidationError("distribution has a negative or non-finite entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("distribution does not sum to 1");
  }
};

struct AccuracyScore {
  double value = 0;  // in [0, 1]
  std::string source;
};

// 1 - (2/pi) * angle(p, q). Operates on raw vectors, so any positive rescaling
// of either argument leaves the result unchanged.
inline double angular_similarity(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("angular similarity: dimension mismatch");
  double pq = 0, pp = 0, qq = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    pq += p[k] * q[k];
    pp += p[k] * p[k];
    qq += q[k] * q[k];
  }
  if (!(pp > 0) || !(qq > 0)) throw ConfigError("angular similarity: zero-norm input");
  const double cosine = std::clamp(pq / (std::sqrt(pp) * std::sqrt(qq)), -1.0, 1.0);
  return 1.0 - (2.0 / std::numbers::pi) * std::acos(cosine);
}

inline double angular_similarity(const GraspDistribution& p, const GraspDistribution& q) {
  p.validate();
  q.validate();
  return angular_similarity(std::span<const double>(p.probabilities), std::span<const double>(q.probabilities));
}

// Dataset accuracy: mean per-sample similarity between predictions and labels.
inline double mean_angular_similarity(const std::vector<GraspDistribution>& predicted,
                                      const std::vector<GraspDistribution>& labels) {
  if (predicted.size() != labels.size() || predicted.empty()) {
    throw ConfigError("mean angular similarity: need equally sized, non-empty sample sets");
  }
  double s = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += angular_similarity(predicted[i], labels[i]);
  return s / static_cast<double>(predicted.size());
}

// 100 * (candidate - baseline) / baseline.
inline double relative_improvement(double candidate, double baseline) {
  if (!(baseline > 0)) throw ConfigError("relative improvement needs a positive baseline");
  return 100.0 * (candidate - baseline) / baseline;
}

struct StrategyCost {
  std::size_t candidates = 0;
  double hours = 0;
};

struct ExplorationCost {
  StrategyCost exhaustive;  // every blockwise TRN trained
  StrategyCost netcut;      // one TRN per feasible network
  double candidate_reduction_pct = 0;
  double speedup = 0;
};

// Compares training effort of the exhaustive blockwise sweep with NetCut.
inline ExplorationCost exploration_cost(StrategyCost exhaustive, StrategyCost netcut) {
  if (!(netcut.hours > 0)) throw ConfigError("exploration cost: NetCut cost must be positive");
  if (!(exhaustive.hours >= 0)) throw ConfigError("exploration cost: negative exhaustive cost");
  ExplorationCost out{exhaustive, netcut, 0, exhaustive.hours / netcut.hours};
  if (exhaustive.candidates > 0) {
    out.candidate_reduction_pct =
        100.0 * (1.0 - static_cast<double>(netcut.candidates) / static_cast<double>(exhaustive.candidates));
  }
  return out;
}

// Same, with one training cost per candidate for both strategies.
inline ExplorationCost exploration_cost(std::size_t exhaustive_candidates, std::size_t netcut_candidates,
                                        double unit_cost_hours) {
  return exploration_cost({exhaustive_candidates, static_cast<double>(exhaustive_candidates) * unit_cost_hours},
                          {netcut_candidates, static_cast<double>(netcut_candidates) * unit_cost_hours});
}

}  // namespace netcut
