#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcut/csv.hpp"
#include "netcut/error.hpp"

// Network architecture descriptors and trimmed-network construction.
//
// Layer indices run from the classification-head end toward the input:
// index 0 is the feature layer directly below the (excluded) classification
// head. Descriptor files list layers in that reverse-topological order, so a
// cutpoint of n removes exactly the layers {0, ..., n-1}.
namespace netcut {

struct LayerRecord {
  std::size_t index = 0;
  std::string name;
  std::string kind;
  std::uint64_t flops = 0;
  std::uint64_t params = 0;
  std::uint64_t filter_size = 0;  // 0 for layers without filters
  std::optional<std::string> block_id;

  bool operator==(const LayerRecord&) const = default;
};

// Inclusive layer-index range of one repeating module.
struct BlockBoundary {
  std::string block_id;
  std::size_t first_index = 0;
  std::size_t last_index = 0;

  std::size_t size() const { return last_index - first_index + 1; }
  bool operator==(const BlockBoundary&) const = default;
};

struct NetworkDescriptor {
  std::string name;
  std::string head_note;
  std::vector<LayerRecord> layers;   // sorted by index, contiguous from 0
  std::vector<BlockBoundary> blocks;  // sorted by first_index, prefix-closed

  std::size_t layer_count() const { return layers.size(); }
  bool operator==(const NetworkDescriptor&) const = default;
};

enum class Granularity { Layerwise, Blockwise };

inline const char* to_string(Granularity g) {
  return g == Granularity::Layerwise ? "layerwise" : "blockwise";
}

inline Granularity parse_granularity(const std::string& s) {
  if (s == "layer" || s == "layerwise") return Granularity::Layerwise;
  if (s == "block" || s == "blockwise") return Granularity::Blockwise;
  throw ConfigError("unknown granularity '" + s + "' (expected layer or block)");
}

// A source network plus the number of head-end layers removed from it.
struct TrimmedNetworkSpec {
  std::string source;
  std::size_t cutpoint = 0;
  Granularity granularity = Granularity::Layerwise;

  std::vector<std::size_t> removed_indices() const {
    std::vector<std::size_t> out(cutpoint);
    for (std::size_t i = 0; i < cutpoint; ++i) out[i] = i;
    return out;
  }

  std::string id() const { return source + "@" + std::to_string(cutpoint); }

  bool operator==(const TrimmedNetworkSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

// Checks every descriptor invariant and normalizes ordering: layers sorted by
// index, blocks sorted by first_index. Throws ValidationError naming the
// offending field.
inline void validate(NetworkDescriptor& net) {
  const std::string where = "network '" + net.name + "'";
  if (net.name.empty()) throw ValidationError("descriptor: field 'name' is empty");

  std::set<std::size_t> seen;
  for (const auto& l : net.layers) {
    if (!seen.insert(l.index).second) {
      throw ValidationError(where + ": duplicate layer index " + std::to_string(l.index) +
                            " (field 'layers[].index')");
    }
  }
  std::sort(net.layers.begin(), net.layers.end(),
            [](const LayerRecord& a, const LayerRecord& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (net.layers[i].index != i) {
      throw ValidationError(where + ": layer indices must be contiguous from 0; missing index " +
                            std::to_string(i) + " (field 'layers[].index')");
    }
  }

  std::map<std::string, const BlockBoundary*> by_id;
  for (const auto& b : net.blocks) {
    if (b.block_id.empty()) throw ValidationError(where + ": empty 'blocks[].block_id'");
    if (!by_id.emplace(b.block_id, &b).second) {
      throw ValidationError(where + ": duplicate block_id '" + b.block_id + "'");
    }
    if (b.first_index > b.last_index) {
      throw ValidationError(where + ": block '" + b.block_id +
                            "' has first_index > last_index (field 'blocks[].first_index')");
    }
    if (b.last_index >= net.layers.size()) {
      throw ValidationError(where + ": block '" + b.block_id +
                            "' exceeds the layer range (field 'blocks[].last_index')");
    }
  }
  std::sort(net.blocks.begin(), net.blocks.end(),
            [](const BlockBoundary& a, const BlockBoundary& b) { return a.first_index < b.first_index; });
  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    const auto expected_first = i == 0 ? 0 : net.blocks[i - 1].last_index + 1;
    if (i > 0 && net.blocks[i].first_index <= net.blocks[i - 1].last_index) {
      throw ValidationError(where + ": blocks '" + net.blocks[i - 1].block_id + "' and '" +
                            net.blocks[i].block_id + "' overlap (field 'blocks')");
    }
    if (net.blocks[i].first_index != expected_first) {
      throw ValidationError(where + ": blocks must tile a prefix of the layer indices starting at 0; "
                            "block '" + net.blocks[i].block_id + "' starts at " +
                            std::to_string(net.blocks[i].first_index) + ", expected " +
                            std::to_string(expected_first) + " (field 'blocks[].first_index')");
    }
  }

  for (const auto& l : net.layers) {
    if (!l.block_id) continue;
    auto it = by_id.find(*l.block_id);
    if (it == by_id.end()) {
      throw ValidationError(where + ": layer " + std::to_string(l.index) + " references unknown block '" +
                            *l.block_id + "' (field 'layers[].block_id')");
    }
    if (l.index < it->second->first_index || l.index > it->second->last_index) {
      throw ValidationError(where + ": layer " + std::to_string(l.index) + " lies outside its block '" +
                            *l.block_id + "' (field 'layers[].block_id')");
    }
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing field '" + key + "'");
  return *it;
}

inline std::uint64_t require_count(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    throw ValidationError(where + ": field '" + key + "' must be >= 0");
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d < 0) throw ValidationError(where + ": field '" + key + "' must be >= 0");
    if (d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      throw ValidationError(where + ": field '" + key + "' must be an integer count");
    }
    return static_cast<std::uint64_t>(d);
  }
  throw ValidationError(where + ": field '" + key + "' must be a number");
}

inline std::string require_string(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline NetworkDescriptor descriptor_from_json(const nlohmann::json& j, const std::string& source = "descriptor") {
  if (!j.is_object()) throw ValidationError(source + ": top level must be a JSON object");
  NetworkDescriptor net;
  net.name = detail::require_string(j, "name", source);
  if (auto it = j.find("head_note"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError(source + ": field 'head_note' must be a string");
    net.head_note = it->get<std::string>();
  }
  const auto& layers = detail::require(j, "layers", source);
  if (!layers.is_array()) throw ValidationError(source + ": field 'layers' must be an array");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& lj = layers[k];
    const std::string where = source + ": layers[" + std::to_string(k) + "]";
    LayerRecord l;
    l.index = detail::require_count(lj, "index", where);
    l.name = detail::require_string(lj, "name", where);
    l.kind = detail::require_string(lj, "kind", where);
    l.flops = detail::require_count(lj, "flops", where);
    l.params = detail::require_count(lj, "params", where);
    l.filter_size = detail::require_count(lj, "filter_size", where);
    if (auto it = lj.find("block_id"); it != lj.end() && !it->is_null()) {
      if (!it->is_string()) throw ValidationError(where + ": field 'block_id' must be a string or null");
      l.block_id = it->get<std::string>();
    }
    net.layers.push_back(std::move(l));
  }
  if (auto it = j.find("blocks"); it != j.end()) {
    if (!it->is_array()) throw ValidationError(source + ": field 'blocks' must be an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& bj = (*it)[k];
      const std::string where = source + ": blocks[" + std::to_string(k) + "]";
      BlockBoundary b;
      b.block_id = detail::require_string(bj, "block_id", where);
      b.first_index = detail::require_count(bj, "first_index", where);
      b.last_index = detail::require_count(bj, "last_index", where);
      net.blocks.push_back(std::move(b));
    }
  }
  validate(net);
  return net;
}

inline nlohmann::json to_json(const NetworkDescriptor& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"index", l.index},
                      {"name", l.name},
                      {"kind", l.kind},
                      {"flops", l.flops},
                      {"params", l.params},
                      {"filter_size", l.filter_size},
                      {"block_id", l.block_id ? nlohmann::json(*l.block_id) : nlohmann::json(nullptr)}});
  }
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : net.blocks) {
    blocks.push_back({{"block_id", b.block_id}, {"first_index", b.first_index}, {"last_index", b.last_index}});
  }
  return {{"name", net.name}, {"head_note", net.head_note}, {"layers", layers}, {"blocks", blocks}};
}

inline NetworkDescriptor load_descriptor(const std::string& path) {
  const auto text = csv::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": JSON parse error: " + e.what());
  }
  return descriptor_from_json(j, path);
}

inline nlohmann::json to_json(const TrimmedNetworkSpec& trn) {
  return {{"source", trn.source},
          {"cutpoint", trn.cutpoint},
          {"removed_indices", trn.removed_indices()},
          {"granularity", to_string(trn.granularity)}};
}

// ---------------------------------------------------------------------------
// Trimming

// Removes the first `cutpoint` head-end layers. A trimmed network keeps at
// least one feature layer, so cutpoint must be < layer_count().
inline TrimmedNetworkSpec remove_layers(const NetworkDescriptor& net, std::size_t cutpoint) {
  if (cutpoint >= net.layer_count()) {
    throw ConfigError("cutpoint " + std::to_string(cutpoint) + " out of range for network '" + net.name +
                      "' with " + std::to_string(net.layer_count()) +
                      " layers (a trimmed network keeps at least one layer)");
  }
  return {net.name, cutpoint, Granularity::Layerwise};
}

inline bool is_block_aligned(const NetworkDescriptor& net, std::size_t cutpoint) {
  if (cutpoint == 0) return true;
  return std::any_of(net.blocks.begin(), net.blocks.end(),
                     [&](const BlockBoundary& b) { return b.last_index + 1 == cutpoint; });
}

// Like remove_layers, but the removed set must be a union of whole blocks.
inline TrimmedNetworkSpec remove_blocks(const NetworkDescriptor& net, std::size_t cutpoint) {
  auto spec = remove_layers(net, cutpoint);
  if (!is_block_aligned(net, cutpoint)) {
    throw ConfigError("cutpoint " + std::to_string(cutpoint) + " splits a block of network '" + net.name + "'");
  }
  spec.granularity = Granularity::Blockwise;
  return spec;
}

inline TrimmedNetworkSpec make_trn(const NetworkDescriptor& net, std::size_t cutpoint, Granularity g) {
  return g == Granularity::Blockwise ? remove_blocks(net, cutpoint) : remove_layers(net, cutpoint);
}

// Block-aligned cutpoints in increasing order, starting with the unmodified
// network and stopping before a removal that would leave no layer.
inline std::vector<TrimmedNetworkSpec> enumerate_blockwise(const NetworkDescriptor& net) {
  std::vector<TrimmedNetworkSpec> out;
  if (net.layer_count() == 0) return out;
  out.push_back({net.name, 0, Granularity::Blockwise});
  for (const auto& b : net.blocks) {
    const auto cut = b.last_index + 1;
    if (cut >= net.layer_count()) break;
    out.push_back({net.name, cut, Granularity::Blockwise});
  }
  return out;
}

inline std::vector<TrimmedNetworkSpec> enumerate_layerwise(const NetworkDescriptor& net) {
  std::vector<TrimmedNetworkSpec> out;
  out.reserve(net.layer_count());
  for (std::size_t c = 0; c < net.layer_count(); ++c) out.push_back({net.name, c, Granularity::Layerwise});
  return out;
}

inline std::vector<TrimmedNetworkSpec> enumerate(const NetworkDescriptor& net, Granularity g) {
  return g == Granularity::Blockwise ? enumerate_blockwise(net) : enumerate_layerwise(net);
}

}  // namespace netcut
