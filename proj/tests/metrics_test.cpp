#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "netcut/metrics.hpp"

using namespace netcut;

namespace {

GraspDistribution random_distribution(std::mt19937& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  GraspDistribution d;
  double sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    // Sparse entries exercise the zero-overlap corner.
    const double v = (rng() % 4 == 0) ? 0.0 : e(rng);
    d.probabilities.push_back(v);
    sum += v;
  }
  if (sum == 0) {
    d.probabilities[rng() % n] = 1.0;
    return d;
  }
  for (auto& p : d.probabilities) p /= sum;
  return d;
}

}  // namespace

TEST(AngularSimilarity, Examples) {
  const GraspDistribution uniform{{0.2, 0.2, 0.2, 0.2, 0.2}};
  EXPECT_NEAR(angular_similarity(uniform, uniform), 1.0, 1e-9);
  EXPECT_NEAR(angular_similarity(GraspDistribution{{1, 0, 0, 0, 0}}, GraspDistribution{{0, 1, 0, 0, 0}}), 0.0, 1e-9);
  EXPECT_NEAR(angular_similarity(GraspDistribution{{0.5, 0.5, 0, 0, 0}}, GraspDistribution{{1, 0, 0, 0, 0}}), 0.5, 1e-9);
}

TEST(AngularSimilarity, Properties) {
  std::mt19937 rng(2024);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 2 + rng() % 9;
    const auto p = random_distribution(rng, n);
    const auto q = random_distribution(rng, n);
    const double s = angular_similarity(p, q);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(s, angular_similarity(q, p));
    EXPECT_NEAR(angular_similarity(p, p), 1.0, 1e-7);
    std::vector<double> scaled = p.probabilities;
    for (auto& v : scaled) v *= 17.5;
    EXPECT_NEAR(angular_similarity(std::span<const double>(scaled), std::span<const double>(q.probabilities)), s,
                1e-9);
  }
}

TEST(AngularSimilarity, Rejects) {
  EXPECT_THROW(angular_similarity(GraspDistribution{{0.5, 0.5}}, GraspDistribution{{1, 0, 0}}), ConfigError);
  EXPECT_THROW(angular_similarity(GraspDistribution{{0.5, 0.6}}, GraspDistribution{{1, 0}}), ValidationError);
  EXPECT_THROW(angular_similarity(GraspDistribution{{-0.5, 1.5}}, GraspDistribution{{1, 0}}), ValidationError);
  EXPECT_THROW(angular_similarity(GraspDistribution{{}}, GraspDistribution{{}}), ValidationError);
}

TEST(AngularSimilarity, DatasetMean) {
  const std::vector<GraspDistribution> pred{{{1, 0}}, {{0.5, 0.5}}};
  const std::vector<GraspDistribution> label{{{1, 0}}, {{1, 0}}};
  EXPECT_NEAR(mean_angular_similarity(pred, label), 0.75, 1e-12);
  EXPECT_THROW(mean_angular_similarity(pred, {}), ConfigError);
}

TEST(RelativeImprovement, Examples) {
  EXPECT_EQ(relative_improvement(0.81, 0.81), 0.0);
  EXPECT_NEAR(relative_improvement(0.8945, 0.81), 10.43, 0.005);
  EXPECT_NEAR(relative_improvement(0.5, 1.0), -50.0, 1e-12);
  EXPECT_THROW(relative_improvement(0.5, 0.0), ConfigError);
}

TEST(ExplorationCost, Examples) {
  const auto c = exploration_cost(148, 7, 183.0 / 148.0);
  EXPECT_NEAR(c.candidate_reduction_pct, 95.27, 0.01);
  EXPECT_NEAR(c.speedup, 148.0 / 7.0, 1e-9);
  EXPECT_NEAR(c.exhaustive.hours, 183.0, 1e-9);

  const auto h = exploration_cost({148, 183.0}, {7, 6.7});
  EXPECT_NEAR(h.speedup, 27.3, 0.05);

  const auto same = exploration_cost(10, 10, 2.0);
  EXPECT_DOUBLE_EQ(same.speedup, 1.0);
  EXPECT_DOUBLE_EQ(same.candidate_reduction_pct, 0.0);

  EXPECT_THROW(exploration_cost({148, 183.0}, {0, 0.0}), ConfigError);
}
