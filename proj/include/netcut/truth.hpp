#pragma once

#include <map>
#include <string>
#include <utility>

#include "netcut/csv.hpp"
#include "netcut/error.hpp"

namespace netcut {

// Measured latencies of trimmed networks, keyed by (network, cutpoint).
// CSV form: header `network,cutpoint,latency_ms`.
struct GroundTruth {
  std::map<std::pair<std::string, std::size_t>, double> latency_ms;

  const double* find(const std::string& network, std::size_t cutpoint) const {
    auto it = latency_ms.find({network, cutpoint});
    return it == latency_ms.end() ? nullptr : &it->second;
  }
};

inline GroundTruth ground_truth_from_csv(std::string_view text, const std::string& source = "ground truth") {
  GroundTruth gt;
  const auto t = csv::parse(text, {"network", "cutpoint", "latency_ms"}, source);
  for (const auto& r : t.rows) {
    const auto at = source + ":" + std::to_string(r.line);
    auto cut = csv::to_int(r.cells[1]);
    if (!cut || *cut < 0) throw ValidationError(at + ": invalid cutpoint '" + r.cells[1] + "'");
    auto v = csv::to_double(r.cells[2]);
    if (!v || !(*v > 0)) throw ValidationError(at + ": latency must be a positive number, got '" + r.cells[2] + "'");
    if (!gt.latency_ms.emplace(std::pair{r.cells[0], static_cast<std::size_t>(*cut)}, *v).second) {
      throw ValidationError(at + ": duplicate key (" + r.cells[0] + ", " + r.cells[1] + ")");
    }
  }
  return gt;
}

inline GroundTruth load_ground_truth(const std::string& path) {
  return ground_truth_from_csv(csv::read_file(path), path);
}

}  // namespace netcut
