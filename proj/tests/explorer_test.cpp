#include <gtest/gtest.h>

#include <random>

#include "netcut/explorer.hpp"
#include "netcut/report.hpp"
#include "netcut/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace netcut;
using netcut::test::make_net;
using netcut::test::make_profile;

namespace {

ParetoPoint pt(double ms, double acc, const std::string& net = "n", std::size_t cut = 0) {
  return {{net, cut, Granularity::Blockwise}, ms, EstimateMethod::Measured, acc};
}

std::vector<ParetoPoint> random_points(std::mt19937& rng, std::size_t n) {
  std::vector<ParetoPoint> pts;
  // Coarse grids force plenty of ties and duplicates.
  const int lat_levels = 1 + static_cast<int>(rng() % 50);
  const int acc_levels = 1 + static_cast<int>(rng() % 50);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(pt(0.01 * static_cast<double>(rng() % lat_levels), 0.01 * static_cast<double>(rng() % acc_levels),
                     "n" + std::to_string(rng() % 5), i));
  }
  return pts;
}

struct Fixture {
  std::vector<NetworkDescriptor> nets;
  std::vector<ProfileTable> tables;
  AccuracyTable acc;
};

// Three hand-built networks with monotone latency tables.
Fixture three_nets() {
  Fixture f;
  f.nets = {make_net("a", 4, {1, 1, 1}), make_net("b", 5, {2, 2}), make_net("c", 3, {1, 1})};
  f.tables = {make_profile("a", 0.8, {0.1, 0.2, 0.2, 0.3}), make_profile("b", 1.6, {0.4, 0.4, 0.4, 0.2, 0.2}),
              make_profile("c", 3.0, {0.5, 0.5, 2.0})};
  for (const auto& n : f.nets) {
    for (std::size_t c = 0; c < n.layer_count(); ++c) f.acc.entries[{n.name, c}] = 0.9 - 0.05 * static_cast<double>(c);
  }
  f.acc.entries[{"b", 2}] = 0.87;
  return f;
}

}  // namespace

TEST(Pareto, Examples) {
  const auto f = pareto_frontier({pt(1, 0.8), pt(2, 0.9), pt(1.5, 0.7)});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(oracle::coordinates(f), (std::vector<std::pair<double, double>>{{1, 0.8}, {2, 0.9}}));
  EXPECT_EQ(pareto_frontier({pt(1, 0.5)}).size(), 1u);
  const auto dup = pareto_frontier({pt(1, 0.5, "z", 3), pt(1, 0.5, "a", 7)});
  ASSERT_EQ(dup.size(), 1u);
  EXPECT_EQ(dup[0].trn.source, "a");
  EXPECT_TRUE(pareto_frontier({}).empty());
}

TEST(Pareto, MatchesBruteForce) {
  std::mt19937 rng(17);
  for (int t = 0; t < 100; ++t) {
    const auto pts = random_points(rng, 1 + rng() % 300);
    const auto f = pareto_frontier(pts);
    EXPECT_EQ(oracle::coordinates(f), oracle::pareto_brute_force(pts));
    for (std::size_t i = 1; i < f.size(); ++i) {
      EXPECT_LT(f[i - 1].latency_ms, f[i].latency_ms);
      EXPECT_LT(f[i - 1].accuracy, f[i].accuracy);
    }
    for (const auto& p : f)
      for (const auto& q : pts) EXPECT_FALSE(dominates(q, p));
  }
}

TEST(GapAnalysis, Examples) {
  const auto g = gap_analysis({pt(0.36, 0.81, "mobilenetv1_0.5"), pt(1.2, 0.88, "resnet50")}, Deadline(0.9));
  ASSERT_TRUE(g.feasible);
  EXPECT_EQ(g.best->trn.source, "mobilenetv1_0.5");
  EXPECT_NEAR(*g.slack_ms, 0.54, 1e-12);
  ASSERT_TRUE(g.next_above);
  EXPECT_NEAR(g.accuracy_gap, 0.07, 1e-12);

  const auto none = gap_analysis({pt(1.0, 0.8), pt(2.0, 0.9)}, Deadline(0.9));
  EXPECT_FALSE(none.feasible);
  EXPECT_FALSE(none.slack_ms);
  EXPECT_EQ(none.next_above->latency_ms, 1.0);

  const auto edge = gap_analysis({pt(0.5, 0.7), pt(0.9, 0.8)}, Deadline(0.9));
  EXPECT_TRUE(edge.feasible);
  EXPECT_EQ(*edge.slack_ms, 0.0);
  EXPECT_EQ(edge.best->accuracy, 0.8);
  EXPECT_FALSE(edge.next_above);

  EXPECT_THROW(gap_analysis({}, Deadline(1)), ConfigError);
  EXPECT_THROW(Deadline(0), ConfigError);
  EXPECT_THROW(Deadline(-1), ConfigError);
}

TEST(Netcut, SingleNetAlreadyFeasible) {
  const auto net = make_net("a", 4, {1, 1});
  const TableEvaluator ev(accuracy_table_from_csv("network,cutpoint,accuracy\na,0,0.7\n"));
  const auto r = netcut::netcut({net}, {make_profile("a", 0.5, {0.1, 0.1, 0.1, 0.1})}, profiler_estimator(), Deadline(0.9), ev,
                        Granularity::Blockwise);
  ASSERT_TRUE(r.winner);
  EXPECT_EQ(r.winner->trn.cutpoint, 0u);
  EXPECT_EQ(r.winner->latency_source, EstimateMethod::Measured);
  EXPECT_EQ(r.candidates_trained, 1u);
  EXPECT_EQ(r.networks[0].candidates_scanned, 1u);
  EXPECT_EQ(r.off_the_shelf->network, "a");
  EXPECT_DOUBLE_EQ(*r.gap_closed_pct, 0.0);
}

TEST(Netcut, ThreeNetsAgainstBruteForce) {
  const auto f = three_nets();
  const TableEvaluator ev(f.acc);
  for (auto g : {Granularity::Layerwise, Granularity::Blockwise}) {
    const auto r = netcut::netcut(f.nets, f.tables, profiler_estimator(), Deadline(0.9), ev, g);
    for (std::size_t i = 0; i < f.nets.size(); ++i) {
      const auto lat = oracle::candidate_latencies(f.nets[i], f.tables[i], profiler_estimator(), g);
      const auto want = oracle::first_feasible(lat, 0.9);
      ASSERT_EQ(r.networks[i].feasible, want.has_value()) << f.nets[i].name;
      if (want) EXPECT_EQ(r.networks[i].trn.cutpoint, *want) << f.nets[i].name;
    }
  }
  // Layerwise by hand: a at 0 (0.8 ms); b at 1 is 1.6 * (1 - 0.4 / 1.6) = 1.2, at 2 is 0.8;
  // c bottoms out at 3.0 * (1 - 1.0 / 3.0) = 2.0 and is infeasible.
  const auto r = netcut::netcut(f.nets, f.tables, profiler_estimator(), Deadline(0.9), ev, Granularity::Layerwise);
  EXPECT_EQ(r.networks[0].trn.cutpoint, 0u);
  EXPECT_EQ(r.networks[1].trn.cutpoint, 2u);
  EXPECT_NEAR(r.networks[1].latency_ms, 1.6 * (1 - 0.8 / 1.6), 1e-12);
  EXPECT_FALSE(r.networks[2].feasible);
  EXPECT_EQ(r.candidates_trained, 2u);
  EXPECT_EQ(r.winner->network, "a");
}

TEST(Netcut, InfeasibleAndAllOffTheShelf) {
  const auto f = three_nets();
  const TableEvaluator ev(f.acc);
  const auto none = netcut::netcut(f.nets, f.tables, profiler_estimator(), Deadline(0.01), ev, Granularity::Blockwise);
  EXPECT_FALSE(none.winner);
  EXPECT_EQ(none.candidates_trained, 0u);
  EXPECT_FALSE(none.cost);
  EXPECT_FALSE(to_json(none)["feasible"].get<bool>());

  const auto all = netcut::netcut(f.nets, f.tables, profiler_estimator(), Deadline(10), ev, Granularity::Blockwise);
  for (const auto& c : all.networks) EXPECT_EQ(c.trn.cutpoint, 0u);
  EXPECT_EQ(all.winner->network, all.off_the_shelf->network);
  EXPECT_EQ(all.winner->accuracy, 0.9);
  EXPECT_EQ(all.winner->network, "a");  // tie on accuracy: lowest latency
}

TEST(Netcut, WinnerTieBreaks) {
  const std::vector<NetworkDescriptor> nets{make_net("zeta", 2), make_net("alpha", 2), make_net("mid", 2)};
  const std::vector<ProfileTable> tables{make_profile("zeta", 0.5, {1, 1}), make_profile("alpha", 0.5, {1, 1}),
                                         make_profile("mid", 0.4, {1, 1})};
  auto t = accuracy_table_from_csv("network,cutpoint,accuracy\nzeta,0,0.8\nalpha,0,0.8\nmid,0,0.7\n");
  auto r = netcut::netcut(nets, tables, profiler_estimator(), Deadline(1), TableEvaluator(t), Granularity::Layerwise);
  EXPECT_EQ(r.winner->network, "alpha");
  t.entries[{"mid", 0}] = 0.8;
  r = netcut::netcut(nets, tables, profiler_estimator(), Deadline(1), TableEvaluator(t), Granularity::Layerwise);
  EXPECT_EQ(r.winner->network, "mid");
}

TEST(Netcut, EvaluatesOnlyChosenTrns) {
  const auto f = three_nets();
  struct Counting : Evaluator {
    const TableEvaluator inner;
    mutable std::vector<std::string> seen;
    explicit Counting(AccuracyTable t) : inner(std::move(t)) {}
    AccuracyScore evaluate(const TrimmedNetworkSpec& t) const override {
      seen.push_back(t.id());
      return inner.evaluate(t);
    }
  } ev(f.acc);
  const auto r = netcut::netcut(f.nets, f.tables, profiler_estimator(), Deadline(0.9), ev, Granularity::Layerwise);
  EXPECT_EQ(ev.seen.size(), r.candidates_trained);
}

TEST(Netcut, RandomFamiliesFirstFeasibleAndSubsetBound) {
  std::mt19937 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto fam = synthetic::build(synthetic::random_specs(static_cast<std::uint32_t>(100 + t), 1 + rng() % 6), 3);
    const TableEvaluator ev(fam.accuracy);
    const double deadline = 0.1 + 2.0 * synthetic::unit(rng);
    const auto r = netcut::netcut(fam.nets, fam.profiles, profiler_estimator(), Deadline(deadline), ev, Granularity::Blockwise);
    EXPECT_LE(r.candidates_trained, fam.nets.size());
    for (std::size_t i = 0; i < fam.nets.size(); ++i) {
      const auto lat = oracle::candidate_latencies(fam.nets[i], fam.profiles[i], profiler_estimator(),
                                                   Granularity::Blockwise);
      const auto want = oracle::first_feasible(lat, deadline);
      ASSERT_EQ(r.networks[i].feasible, want.has_value());
      if (want) {
        EXPECT_EQ(r.networks[i].trn.cutpoint, *want);
        EXPECT_LE(r.networks[i].latency_ms, deadline);
      }
    }
    // The heuristic explores a subset of the blockwise space.
    if (r.winner) {
      double best = 0;
      for (const auto& p : explore_blockwise(fam.nets, fam.profiles, ev)) best = std::max(best, p.accuracy);
      EXPECT_LE(r.winner->accuracy, best);
    }
  }
}

TEST(Netcut, DeterministicAcrossJobCounts) {
  const auto fam = synthetic::reference_family();
  const TableEvaluator ev(fam.accuracy);
  NetcutOptions one, four;
  four.jobs = 4;
  const auto a = netcut::netcut(fam.nets, fam.profiles, profiler_estimator(), Deadline(0.9), ev, Granularity::Blockwise, one);
  const auto b = netcut::netcut(fam.nets, fam.profiles, profiler_estimator(), Deadline(0.9), ev, Granularity::Blockwise, four);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Netcut, ReferenceFamilyAccounting) {
  const auto fam = synthetic::reference_family();
  const TableEvaluator ev(fam.accuracy);
  const auto r = netcut::netcut(fam.nets, fam.profiles, profiler_estimator(), Deadline(0.9), ev, Granularity::Blockwise);
  EXPECT_EQ(r.baseline_candidates, 148u);
  EXPECT_EQ(r.candidates_trained, 7u);
  ASSERT_TRUE(r.cost);
  EXPECT_NEAR(r.cost->candidate_reduction_pct, 95.27, 0.01);
  EXPECT_GE(r.cost->speedup, 20.0);
}

TEST(ExploreBlockwise, Examples) {
  const TableEvaluator ev(accuracy_table_from_csv("network,cutpoint,accuracy\nn,0,0.9\nn,2,0.8\nn,4,0.7\n"));
  EXPECT_EQ(explore_blockwise({make_net("n", 5, {2, 2})}, {make_profile("n", 1, {1, 1, 1, 1, 1})}, ev).size(), 3u);
  EXPECT_EQ(explore_blockwise({make_net("n", 4, {2, 2})}, {make_profile("n", 1, {1, 1, 1, 1})}, ev).size(), 2u);
  EXPECT_TRUE(explore_blockwise({}, {}, ev).empty());

  const auto fam = synthetic::reference_family();
  const auto pts = explore_blockwise(fam.nets, fam.profiles, TableEvaluator(fam.accuracy), &fam.truth);
  EXPECT_EQ(pts.size(), 148u);
  for (const auto& p : pts) EXPECT_EQ(p.latency_ms, fam.truth.latency_ms.at({p.trn.source, p.trn.cutpoint}));
}

TEST(ExploreBlockwise, ListsEveryCoverageGap) {
  const TableEvaluator ev(accuracy_table_from_csv("network,cutpoint,accuracy\nn,0,0.9\n"));
  try {
    explore_blockwise({make_net("n", 5, {2, 2})}, {make_profile("n", 1, {1, 1, 1, 1, 1})}, ev);
    FAIL();
  } catch (const EvaluatorError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2 of 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("n@2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("n@4"), std::string::npos) << msg;
    EXPECT_EQ(e.kind(), EvaluatorError::Kind::MissingKey);
  }
}

TEST(Report, ParetoCsvRoundTrip) {
  const std::vector<ParetoPoint> pts{pt(0.1 + 0.2, 0.8, "a", 2), pt(1.0 / 3.0, 0.9, "b", 0), pt(0.5, 0.7, "c", 1)};
  const auto f = pareto_frontier(pts);
  std::ostringstream os;
  write_pareto_csv(os, pts, f);
  const auto rows = pareto_csv_from_text(os.str());
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].point.latency_ms, pts[i].latency_ms);
    EXPECT_EQ(rows[i].point.accuracy, pts[i].accuracy);
    EXPECT_EQ(rows[i].point.trn.source, pts[i].trn.source);
  }
  EXPECT_TRUE(rows[0].on_frontier);
  EXPECT_TRUE(rows[1].on_frontier);
  EXPECT_FALSE(rows[2].on_frontier);
}
