#pragma once

#include <charconv>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcut/csv.hpp"
#include "netcut/explorer.hpp"

// Serialization of exploration results: report JSON, a plain-text summary and
// the Pareto point CSV.
namespace netcut {

// Shortest decimal form that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : std::to_string(v);
}

inline nlohmann::json to_json(const ParetoPoint& p) {
  return {{"network", p.trn.source},
          {"cutpoint", p.trn.cutpoint},
          {"latency_ms", p.latency_ms},
          {"latency_source", to_string(p.latency_source)},
          {"accuracy", p.accuracy}};
}

inline nlohmann::json to_json(const NetworkChoice& c) {
  nlohmann::json j = {{"network", c.network},
                      {"status", c.feasible ? "feasible" : "infeasible"},
                      {"original_latency_ms", c.original_latency_ms},
                      {"candidates_scanned", c.candidates_scanned}};
  if (c.feasible) {
    j["cutpoint"] = c.trn.cutpoint;
    j["granularity"] = to_string(c.trn.granularity);
    j["latency_ms"] = c.latency_ms;
    j["latency_source"] = to_string(c.latency_source);
    j["extrapolated"] = c.extrapolated;
    j["accuracy"] = c.accuracy;
  }
  return j;
}

inline nlohmann::json to_json(const GapAnalysis& g) {
  nlohmann::json j = {{"feasible", g.feasible}, {"accuracy_gap", g.accuracy_gap}};
  j["best"] = g.best ? to_json(*g.best) : nlohmann::json(nullptr);
  j["slack_ms"] = g.slack_ms ? nlohmann::json(*g.slack_ms) : nlohmann::json(nullptr);
  j["next_above"] = g.next_above ? to_json(*g.next_above) : nlohmann::json(nullptr);
  return j;
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// Deterministic for identical inputs. Run metadata (timestamps) belongs under
// the separate "metadata" key added by the caller.
inline nlohmann::json to_json(const ExplorationReport& r) {
  nlohmann::json nets = nlohmann::json::array();
  for (const auto& c : r.networks) nets.push_back(to_json(c));
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : r.points) points.push_back(to_json(p));
  nlohmann::json frontier = nlohmann::json::array();
  for (const auto& p : r.frontier) frontier.push_back(to_json(p));

  nlohmann::json cost = nullptr;
  if (r.cost) {
    cost = {{"unit_cost_hours", r.unit_cost_hours},
            {"blockwise_candidates", r.cost->exhaustive.candidates},
            {"blockwise_hours", r.cost->exhaustive.hours},
            {"netcut_candidates", r.cost->netcut.candidates},
            {"netcut_hours", r.cost->netcut.hours},
            {"candidate_reduction_pct", r.cost->candidate_reduction_pct},
            {"speedup", r.cost->speedup}};
  }
  return {{"deadline_ms", r.deadline_ms},
          {"estimator", r.estimator},
          {"granularity", to_string(r.granularity)},
          {"feasible", r.winner.has_value()},
          {"networks", nets},
          {"winner", r.winner ? to_json(*r.winner) : nlohmann::json(nullptr)},
          {"off_the_shelf", r.off_the_shelf ? to_json(*r.off_the_shelf) : nlohmann::json(nullptr)},
          {"candidates_trained", r.candidates_trained},
          {"baseline_candidates", r.baseline_candidates},
          {"cost", cost},
          {"slack_ms", optional_json(r.slack_ms)},
          {"gap_closed_pct", optional_json(r.gap_closed_pct)},
          {"points", points},
          {"frontier", frontier}};
}

inline void write_summary(std::ostream& os, const ExplorationReport& r) {
  os << std::fixed;
  os << "deadline: " << std::setprecision(4) << r.deadline_ms << " ms, estimator: " << r.estimator
     << ", granularity: " << to_string(r.granularity) << "\n\n";
  os << std::left << std::setw(24) << "network" << std::right << std::setw(10) << "orig ms" << std::setw(10)
     << "cutpoint" << std::setw(12) << "latency ms" << std::setw(11) << "source" << std::setw(10) << "accuracy"
     << '\n';
  for (const auto& c : r.networks) {
    os << std::left << std::setw(24) << c.network << std::right << std::setw(10) << std::setprecision(4)
       << c.original_latency_ms;
    if (c.feasible) {
      os << std::setw(10) << c.trn.cutpoint << std::setw(12) << c.latency_ms << std::setw(11)
         << to_string(c.latency_source) << std::setw(10) << c.accuracy << (c.extrapolated ? "  (extrapolated)" : "");
    } else {
      os << "  infeasible: no TRN meets the deadline";
    }
    os << '\n';
  }
  os << '\n';
  if (!r.winner) {
    os << "result: infeasible, no network meets the deadline\n";
  } else {
    os << "winner: " << r.winner->network << " cutpoint " << r.winner->trn.cutpoint << ", accuracy "
       << r.winner->accuracy << ", latency " << r.winner->latency_ms << " ms (" << to_string(r.winner->latency_source)
       << "), slack " << *r.slack_ms << " ms\n";
    if (r.off_the_shelf) {
      os << "best off-the-shelf within deadline: " << r.off_the_shelf->network << ", accuracy "
         << r.off_the_shelf->accuracy << "\n";
    }
    if (r.gap_closed_pct) os << "relative accuracy improvement: " << std::setprecision(2) << *r.gap_closed_pct << " %\n";
  }
  os << "candidates trained: " << r.candidates_trained << " vs " << r.baseline_candidates << " blockwise candidates";
  if (r.cost) {
    os << " (" << std::setprecision(2) << r.cost->candidate_reduction_pct << " % fewer)\n";
    os << "training cost at " << std::setprecision(4) << r.unit_cost_hours << " h/candidate: " << std::setprecision(2)
       << r.cost->netcut.hours << " h vs " << r.cost->exhaustive.hours << " h, speedup " << r.cost->speedup << "x\n";
  } else {
    os << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

// `network,cutpoint,latency_ms,accuracy,on_frontier`, points in input order.
inline void write_pareto_csv(std::ostream& os, const std::vector<ParetoPoint>& points,
                             const std::vector<ParetoPoint>& frontier) {
  std::set<std::pair<std::string, std::size_t>> on;
  for (const auto& p : frontier) on.emplace(p.trn.source, p.trn.cutpoint);
  os << "network,cutpoint,latency_ms,accuracy,on_frontier\n";
  for (const auto& p : points) {
    os << p.trn.source << ',' << p.trn.cutpoint << ',' << format_number(p.latency_ms) << ','
       << format_number(p.accuracy) << ',' << (on.count({p.trn.source, p.trn.cutpoint}) ? 1 : 0) << '\n';
  }
}

struct ParetoRow {
  ParetoPoint point;
  bool on_frontier = false;
};

inline std::vector<ParetoRow> pareto_csv_from_text(std::string_view text, const std::string& source = "pareto csv") {
  const auto t = csv::parse(text, {"network", "cutpoint", "latency_ms", "accuracy", "on_frontier"}, source);
  std::vector<ParetoRow> out;
  for (const auto& r : t.rows) {
    const auto at = source + ":" + std::to_string(r.line);
    auto cut = csv::to_int(r.cells[1]);
    auto lat = csv::to_double(r.cells[2]);
    auto acc = csv::to_double(r.cells[3]);
    if (!cut || *cut < 0 || !lat || !acc || (r.cells[4] != "0" && r.cells[4] != "1")) {
      throw ValidationError(at + ": malformed Pareto row");
    }
    ParetoRow row;
    row.point.trn = {r.cells[0], static_cast<std::size_t>(*cut), Granularity::Blockwise};
    row.point.latency_ms = *lat;
    row.point.accuracy = *acc;
    row.on_frontier = r.cells[4] == "1";
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace netcut
