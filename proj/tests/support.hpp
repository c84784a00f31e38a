#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "netcut/netmodel.hpp"
#include "netcut/profile.hpp"

namespace netcut::test {

// Net with `n` layers; blocks given as sizes from the head end.
inline NetworkDescriptor make_net(const std::string& name, std::size_t n, const std::vector<std::size_t>& blocks = {}) {
  NetworkDescriptor net;
  net.name = name;
  std::size_t idx = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    BlockBoundary blk{"b" + std::to_string(b), idx, idx + blocks[b] - 1};
    net.blocks.push_back(blk);
    for (std::size_t k = 0; k < blocks[b]; ++k) {
      net.layers.push_back({idx, "l" + std::to_string(idx), "conv", 100 * (idx + 1), 10 * (idx + 1), 9, blk.block_id});
      ++idx;
    }
  }
  for (; idx < n; ++idx) net.layers.push_back({idx, "l" + std::to_string(idx), "conv", 100 * (idx + 1), 10 * (idx + 1), 9, std::nullopt});
  validate(net);
  return net;
}

inline ProfileTable make_profile(const std::string& name, double measured, std::vector<double> layers) {
  ProfileTable t;
  t.network = name;
  t.device = "test";
  t.measured_latency_ms = measured;
  t.layer_latency_ms = std::move(layers);
  return t;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("netcut_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& rel) const { return (path_ / rel).string(); }

  std::string write(const std::string& rel, const std::string& text) const {
    const auto p = path_ / rel;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace netcut::test
