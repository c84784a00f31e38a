#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcut/evaluator.hpp"
#include "netcut/netmodel.hpp"
#include "netcut/profile.hpp"
#include "netcut/report.hpp"
#include "netcut/truth.hpp"

// Synthetic network families with a simulated device, for demos and tests.
//
// Device model: a layer costs launch_ms + k * flops^0.9 and the classification
// head a fixed head_ms, so the latency of a TRN is
//   head_ms + sum over retained layers
// times a small deterministic jitter. Profiles record each layer with a 5 %
// timing overhead, which the ratio form of the profiler estimator cancels.
namespace netcut::synthetic {

struct NetworkSpec {
  std::string name;
  std::vector<std::size_t> block_sizes;  // head-end block first
  std::size_t stem_layers = 1;           // input-side layers outside any block
  double latency_ms = 1.0;               // end-to-end latency of the unmodified network
  double base_accuracy = 0.8;
  double accuracy_drop = 0.3;            // accuracy lost when everything but one layer is removed
  double drop_exponent = 2.0;            // < 1: sensitive to removal, > 1: robust
  double flops_scale = 1e7;
  double params_scale = 1e5;
  double launch_ms = 0.004;
  double head_ms = 0.02;
};

struct Family {
  std::vector<NetworkDescriptor> nets;
  std::vector<ProfileTable> profiles;
  GroundTruth truth;        // every layerwise TRN
  AccuracyTable accuracy;   // every blockwise TRN
};

// Uniform in [0, 1) independent of the standard library's distributions.
inline double unit(std::mt19937& g) { return static_cast<double>(g()) / 4294967296.0; }

inline double round_to(double v, double quantum) { return std::round(v / quantum) * quantum; }

inline Family build(const std::vector<NetworkSpec>& specs, std::uint32_t seed = 7) {
  Family fam;
  fam.accuracy.provenance = "synthetic";
  for (std::size_t n = 0; n < specs.size(); ++n) {
    const auto& s = specs[n];
    std::mt19937 rng(seed * 1000003u + static_cast<std::uint32_t>(n));

    NetworkDescriptor net;
    net.name = s.name;
    net.head_note = "global average pooling, 2x FC/ReLU, FC/softmax";
    std::size_t index = 0;
    for (std::size_t b = 0; b < s.block_sizes.size(); ++b) {
      BlockBoundary blk{"block" + std::to_string(b), index, index + s.block_sizes[b] - 1};
      for (std::size_t k = 0; k < s.block_sizes[b]; ++k) net.layers.push_back({index++, "", "", 0, 0, 0, blk.block_id});
      net.blocks.push_back(blk);
    }
    for (std::size_t k = 0; k < s.stem_layers; ++k) net.layers.push_back({index++, "", "", 0, 0, 0, std::nullopt});
    const std::size_t L = net.layers.size();

    // Layers near the head are narrow in space but wide in channels.
    std::vector<double> t(L);
    double t_sum = 0;
    for (std::size_t i = 0; i < L; ++i) {
      auto& l = net.layers[i];
      const double depth = static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(L - 1, 1));
      const bool depthwise = (i % 3 == 1);
      const std::size_t k = depthwise ? 9 : (i % 3 == 0 ? 1 : 9);
      const double channels = std::round(32 + 992 * (1 - depth) * (0.6 + 0.8 * unit(rng)));
      l.name = s.name + "/layer" + std::to_string(i);
      l.kind = depthwise ? "conv_dw" : "conv";
      l.flops = static_cast<std::uint64_t>(s.flops_scale * (depthwise ? 0.15 : 1.0) * (0.4 + 1.2 * unit(rng)));
      l.params = static_cast<std::uint64_t>(s.params_scale * (1 + 3 * (1 - depth)) * (0.5 + unit(rng)));
      l.filter_size = static_cast<std::uint64_t>(k * channels);
      t[i] = std::pow(static_cast<double>(l.flops), 0.9);
      t_sum += t[i];
    }
    // Scale per-layer work so the unmodified network hits its target latency.
    const double work_ms = s.latency_ms - s.head_ms - s.launch_ms * static_cast<double>(L);
    const double k = (work_ms > 0 ? work_ms : 0.5 * s.latency_ms) / t_sum;
    for (auto& v : t) v = s.launch_ms + k * v;

    std::vector<double> suffix(L + 1, 0.0);
    for (std::size_t i = L; i-- > 0;) suffix[i] = suffix[i + 1] + t[i];
    auto jitter = [&] { return 1.0 + 0.006 * (2 * unit(rng) - 1); };

    ProfileTable prof;
    prof.network = s.name;
    prof.device = "synthetic-gpu";
    for (std::size_t c = 0; c < L; ++c) {
      const double lat = round_to((s.head_ms + suffix[c]) * (c == 0 ? 1.0 : jitter()), 1e-6);
      fam.truth.latency_ms[{s.name, c}] = lat;
      if (c == 0) prof.measured_latency_ms = lat;
    }
    for (std::size_t i = 0; i < L; ++i) {
      prof.layer_latency_ms.push_back(round_to(t[i] * 1.05 * (1.0 + 0.02 * (2 * unit(rng) - 1)), 1e-6));
    }

    for (const auto& trn : enumerate_blockwise(net)) {
      const double frac = static_cast<double>(trn.cutpoint) / static_cast<double>(L);
      double acc = s.base_accuracy - s.accuracy_drop * std::pow(frac, s.drop_exponent);
      if (trn.cutpoint > 0) acc += 0.004 * (2 * unit(rng) - 1);
      fam.accuracy.entries[{s.name, trn.cutpoint}] = std::clamp(round_to(acc, 1e-4), 0.0, 1.0);
    }

    fam.nets.push_back(std::move(net));
    fam.profiles.push_back(std::move(prof));
  }
  return fam;
}

// Seven source networks shaped like common efficient ImageNet backbones.
// Their block counts give 148 blockwise candidates in total.
inline std::vector<NetworkSpec> reference_specs() {
  std::vector<NetworkSpec> s;
  s.push_back({"mobilenetv1_0.25", std::vector<std::size_t>(13, 2), 2, 0.22, 0.74, 0.45, 0.6, 2e6, 1.5e4});
  s.push_back({"mobilenetv1_0.5", std::vector<std::size_t>(13, 2), 2, 0.36, 0.81, 0.45, 0.6, 6e6, 5e4});
  s.push_back({"mobilenetv2_1.0", std::vector<std::size_t>(17, 3), 2, 1.05, 0.835, 0.40, 0.8, 1e7, 8e4});
  s.push_back({"mobilenetv2_1.4", std::vector<std::size_t>(17, 3), 2, 1.45, 0.845, 0.40, 0.8, 1.8e7, 1.4e5});
  s.push_back({"inceptionv3", {7, 7, 10, 10, 10, 10, 4, 10, 7, 7, 7}, 5, 2.9, 0.86, 0.30, 2.5, 6e7, 4e5});
  s.push_back({"resnet50",
               {3, 3, 4, 3, 3, 3, 3, 4, 3, 3, 3, 4, 3, 3, 4, 3}, 1, 1.9, 0.885, 0.30, 3.5, 6e7, 5e5});
  s.push_back({"densenet121", std::vector<std::size_t>(54, 2), 2, 2.6, 0.875, 0.30, 3.0, 1.5e7, 6e4});
  return s;
}

inline Family reference_family() { return build(reference_specs()); }

// Random family of `count` networks with 1..max_blocks blocks each.
inline std::vector<NetworkSpec> random_specs(std::uint32_t seed, std::size_t count, std::size_t max_blocks = 12) {
  std::mt19937 rng(seed);
  std::vector<NetworkSpec> out;
  for (std::size_t n = 0; n < count; ++n) {
    NetworkSpec s;
    s.name = "net" + std::to_string(n);
    const std::size_t blocks = 1 + rng() % max_blocks;
    for (std::size_t b = 0; b < blocks; ++b) s.block_sizes.push_back(1 + rng() % 5);
    s.stem_layers = rng() % 3;
    s.latency_ms = 0.2 + 3.0 * unit(rng);
    s.base_accuracy = 0.6 + 0.35 * unit(rng);
    s.accuracy_drop = 0.1 + 0.4 * unit(rng);
    s.drop_exponent = 0.5 + 3.0 * unit(rng);
    s.flops_scale = 1e6 * (1 + 50 * unit(rng));
    s.launch_ms = 0.001 + 0.004 * unit(rng);
    s.head_ms = 0.005 + 0.03 * unit(rng);
    out.push_back(std::move(s));
  }
  return out;
}

// Writes descriptors, CSV profiles with sidecars, the accuracy and
// ground-truth tables, and a run config into `dir`.
inline void write(const Family& fam, const std::filesystem::path& dir, double deadline_ms = 0.9) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "descriptors");
  fs::create_directories(dir / "profiles");
  nlohmann::json networks = nlohmann::json::array();
  for (std::size_t n = 0; n < fam.nets.size(); ++n) {
    const auto& net = fam.nets[n];
    const auto desc_rel = "descriptors/" + net.name + ".json";
    const auto prof_rel = "profiles/" + net.name + ".csv";
    std::ofstream(dir / desc_rel) << to_json(net).dump(2) << '\n';
    save_profile_csv(fam.profiles[n], (dir / prof_rel).string());
    networks.push_back({{"descriptor", desc_rel}, {"profile", prof_rel}});
  }
  {
    std::ofstream out(dir / "accuracy.csv");
    out << "network,cutpoint,accuracy\n";
    for (const auto& [key, acc] : fam.accuracy.entries) {
      out << key.first << ',' << key.second << ',' << format_number(acc) << '\n';
    }
  }
  {
    std::ofstream out(dir / "ground_truth.csv");
    out << "network,cutpoint,latency_ms\n";
    for (const auto& [key, lat] : fam.truth.latency_ms) {
      out << key.first << ',' << key.second << ',' << format_number(lat) << '\n';
    }
  }
  const nlohmann::json cfg = {
      {"networks", networks},
      {"evaluator", {{"backend", "table"}, {"table_path", "accuracy.csv"}, {"interpolate", false}}},
      {"ground_truth", "ground_truth.csv"},
      {"estimator", "profiler"},
      {"analytical",
       {{"gamma_grid", {1e-3, 1e-2, 1e-1, 1.0, 10.0}},
        {"c_grid", {1.0, 1e2, 1e4, 1e6}},
        {"folds", 10},
        {"epsilon", 0.01},
        {"train_fraction", 0.2}}},
      {"deadline_ms", deadline_ms},
      {"granularity", "block"},
      {"output_dir", "out"},
      {"unit_cost_hours", 183.0 / 148.0},
      {"jobs", 1},
      {"seed", 0}};
  std::ofstream(dir / "config.json") << cfg.dump(2) << '\n';
}

}  // namespace netcut::synthetic
