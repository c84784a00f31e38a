#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcut/csv.hpp"
#include "netcut/error.hpp"
#include "netcut/netmodel.hpp"

// Per-layer profiling tables and the profiler-based latency estimator.
//
// A table holds the measured end-to-end latency of the unmodified network
// (classification head included) and one latency per feature layer (head
// excluded). Measurements are expected to follow the usual warm-up protocol
// (e.g. 200 discarded inferences, then the mean of 800 timed runs); the
// library only ingests the resulting numbers.
namespace netcut {

struct ProfileTable {
  std::string network;
  std::string device;
  double measured_latency_ms = 0;
  std::vector<double> layer_latency_ms;  // position == layer index

  double layer_sum() const {
    double s = 0;
    for (double v : layer_latency_ms) s += v;
    return s;
  }
};

enum class EstimateMethod { Profiler, Analytical, Measured };

inline const char* to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::Profiler: return "profiler";
    case EstimateMethod::Analytical: return "analytical";
    case EstimateMethod::Measured: return "measured";
  }
  return "?";
}

struct LatencyEstimate {
  double value_ms = 0;
  EstimateMethod method = EstimateMethod::Profiler;
  TrimmedNetworkSpec trn;
  bool extrapolated = false;  // analytical query outside the training range
};

// Checks table invariants and that its index set equals the descriptor's.
inline void bind_profile(const ProfileTable& t, const NetworkDescriptor& net, const std::string& source = "profile") {
  if (t.network != net.name) {
    throw ValidationError(source + ": profile is for network '" + t.network + "', expected '" + net.name + "'");
  }
  if (!(t.measured_latency_ms > 0) || !std::isfinite(t.measured_latency_ms)) {
    throw ValidationError(source + ": measured_latency_ms must be > 0 for network '" + t.network + "'");
  }
  if (t.layer_latency_ms.size() < net.layer_count()) {
    throw ValidationError(source + ": profile incomplete at index " + std::to_string(t.layer_latency_ms.size()) +
                          " for network '" + t.network + "'");
  }
  if (t.layer_latency_ms.size() > net.layer_count()) {
    throw ValidationError(source + ": profile has index " + std::to_string(net.layer_count()) +
                          " not present in network '" + t.network + "'");
  }
  bool any_positive = false;
  for (std::size_t i = 0; i < t.layer_latency_ms.size(); ++i) {
    const double v = t.layer_latency_ms[i];
    if (!(v >= 0) || !std::isfinite(v)) {
      throw ValidationError(source + ": negative or non-finite latency at index " + std::to_string(i) +
                            " for network '" + t.network + "'");
    }
    any_positive = any_positive || v > 0;
  }
  if (!any_positive) {
    throw ValidationError(source + ": all layer latencies are zero for network '" + t.network + "'");
  }
}

namespace detail {

// Builds a dense index -> latency vector, reporting the first gap.
inline std::vector<double> densify(const std::vector<std::pair<long long, double>>& rows,
                                   const NetworkDescriptor& net, const std::string& source) {
  std::vector<double> dense(net.layer_count(), 0.0);
  std::vector<bool> have(net.layer_count(), false);
  for (const auto& [idx, v] : rows) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= net.layer_count()) {
      throw ValidationError(source + ": profile has index " + std::to_string(idx) + " not present in network '" +
                            net.name + "'");
    }
    if (have[idx]) throw ValidationError(source + ": duplicate profile index " + std::to_string(idx));
    have[idx] = true;
    dense[idx] = v;
  }
  for (std::size_t i = 0; i < have.size(); ++i) {
    if (!have[i]) {
      throw ValidationError(source + ": profile incomplete at index " + std::to_string(i) + " for network '" +
                            net.name + "'");
    }
  }
  return dense;
}

inline double json_number(const nlohmann::json& j, const char* key, const std::string& source) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(source + ": missing field '" + key + "'");
  if (!it->is_number()) throw ValidationError(source + ": field '" + key + "' must be numeric");
  return it->get<double>();
}

inline nlohmann::json parse_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": JSON parse error: " + e.what());
  }
}

}  // namespace detail

// Parses the combined JSON form:
//   {"network", "device", "measured_latency_ms", "layer_latencies": {"0": ms, ...}}
inline ProfileTable profile_from_json(const nlohmann::json& j, const NetworkDescriptor& net,
                                      const std::string& source = "profile") {
  if (!j.is_object()) throw ValidationError(source + ": top level must be a JSON object");
  ProfileTable t;
  t.network = detail::require_string(j, "network", source);
  t.device = j.contains("device") && j["device"].is_string() ? j["device"].get<std::string>() : "";
  t.measured_latency_ms = detail::json_number(j, "measured_latency_ms", source);
  const auto& ll = detail::require(j, "layer_latencies", source);
  if (!ll.is_object()) throw ValidationError(source + ": field 'layer_latencies' must be an object");
  std::vector<std::pair<long long, double>> rows;
  for (const auto& [k, v] : ll.items()) {
    auto idx = csv::to_int(k);
    if (!idx) throw ValidationError(source + ": non-integer layer index '" + k + "'");
    if (!v.is_number()) throw ValidationError(source + ": non-numeric latency at index " + k);
    rows.emplace_back(*idx, v.get<double>());
  }
  if (t.network == net.name) t.layer_latency_ms = detail::densify(rows, net, source);
  bind_profile(t, net, source);
  return t;
}

inline nlohmann::json to_json(const ProfileTable& t) {
  nlohmann::json ll = nlohmann::json::object();
  for (std::size_t i = 0; i < t.layer_latency_ms.size(); ++i) ll[std::to_string(i)] = t.layer_latency_ms[i];
  return {{"network", t.network},
          {"device", t.device},
          {"measured_latency_ms", t.measured_latency_ms},
          {"layer_latencies", ll}};
}

// Path of the header sidecar for a CSV profile: same stem, ".json" extension.
inline std::string profile_sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json").string();
}

// Parses an `index,latency_ms` CSV body plus its sidecar header object.
inline ProfileTable profile_from_csv(std::string_view csv_text, const nlohmann::json& header,
                                     const NetworkDescriptor& net, const std::string& source = "profile") {
  ProfileTable t;
  t.network = detail::require_string(header, "network", source + " (sidecar)");
  t.device = header.contains("device") && header["device"].is_string() ? header["device"].get<std::string>() : "";
  t.measured_latency_ms = detail::json_number(header, "measured_latency_ms", source + " (sidecar)");

  const auto table = csv::parse(csv_text, {"index", "latency_ms"}, source);
  std::vector<std::pair<long long, double>> rows;
  for (const auto& r : table.rows) {
    auto idx = csv::to_int(r.cells[0]);
    if (!idx) throw ValidationError(source + ":" + std::to_string(r.line) + ": non-integer index '" + r.cells[0] + "'");
    auto v = csv::to_double(r.cells[1]);
    if (!v) {
      throw ValidationError(source + ":" + std::to_string(r.line) + ": non-numeric latency '" + r.cells[1] + "'");
    }
    rows.emplace_back(*idx, *v);
  }
  if (t.network == net.name) t.layer_latency_ms = detail::densify(rows, net, source);
  bind_profile(t, net, source);
  return t;
}

// Loads either a combined `.json` profile or a CSV with a sidecar header.
inline ProfileTable load_profile(const std::string& path, const NetworkDescriptor& net) {
  if (std::filesystem::path(path).extension() == ".json") {
    return profile_from_json(detail::parse_json_file(path), net, path);
  }
  const auto sidecar = profile_sidecar_path(path);
  if (!std::filesystem::exists(sidecar)) {
    throw ConfigError(path + ": missing sidecar header '" + sidecar + "'");
  }
  return profile_from_csv(csv::read_file(path), detail::parse_json_file(sidecar), net, path);
}

// Writes `<stem>.csv` and its `<stem>.json` sidecar.
inline void save_profile_csv(const ProfileTable& t, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw ConfigError("cannot write '" + csv_path + "'");
  out << "index,latency_ms\n";
  out.precision(17);
  for (std::size_t i = 0; i < t.layer_latency_ms.size(); ++i) out << i << ',' << t.layer_latency_ms[i] << '\n';
  std::ofstream side(profile_sidecar_path(csv_path));
  side << nlohmann::json{{"network", t.network}, {"device", t.device}, {"measured_latency_ms", t.measured_latency_ms}}
              .dump(2)
       << '\n';
}

// Scales the measured end-to-end latency by the share of summed per-layer
// latency that survives the removal:
//   measured * (1 - sum(removed layers) / sum(all layers))
// The ratio form cancels the per-layer timing overhead that makes the layer
// sum exceed the end-to-end measurement.
inline LatencyEstimate estimate_profiler(const ProfileTable& t, const TrimmedNetworkSpec& trn) {
  if (trn.source != t.network) {
    throw ConfigError("profile for '" + t.network + "' cannot estimate TRN of '" + trn.source + "'");
  }
  if (trn.cutpoint > t.layer_latency_ms.size()) {
    throw ConfigError("TRN " + trn.id() + " removes index " + std::to_string(trn.cutpoint - 1) +
                      " absent from the profile");
  }
  double removed = 0;
  for (std::size_t i = 0; i < trn.cutpoint; ++i) removed += t.layer_latency_ms[i];
  const double total = t.layer_sum();
  const double value = trn.cutpoint == 0 ? t.measured_latency_ms : t.measured_latency_ms * (1.0 - removed / total);
  return {std::max(0.0, value), EstimateMethod::Profiler, trn, false};
}

// Sum of layer latencies over the end-to-end measurement. Typically slightly
// above 1 on real hardware because of per-layer timing events.
inline double profiler_overhead_ratio(const ProfileTable& t) { return t.layer_sum() / t.measured_latency_ms; }

}  // namespace netcut
