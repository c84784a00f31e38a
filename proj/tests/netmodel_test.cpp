#include <gtest/gtest.h>

#include <random>
#include <set>

#include "netcut/netmodel.hpp"
#include "support.hpp"

using namespace netcut;
using netcut::test::make_net;
using netcut::test::TempDir;

namespace {

const char* kThreeLayer = R"({
  "name": "tiny",
  "head_note": "gap + fc",
  "layers": [
    {"index": 2, "name": "conv_c", "kind": "conv", "flops": 300, "params": 30, "filter_size": 27},
    {"index": 0, "name": "conv_a", "kind": "conv", "flops": 100, "params": 10, "filter_size": 9},
    {"index": 1, "name": "conv_b", "kind": "conv", "flops": 200, "params": 20, "filter_size": 18}
  ]
})";

// Inception-like: 11 blocks of irregular size after a head-end stem-free prefix.
NetworkDescriptor inception_like() {
  return make_net("inception_like", 94, {7, 7, 10, 10, 10, 10, 4, 10, 7, 7, 7});
}

}  // namespace

TEST(LoadDescriptor, ThreeLayerFileSortsByIndex) {
  TempDir dir;
  const auto net = load_descriptor(dir.write("tiny.json", kThreeLayer));
  ASSERT_EQ(net.layer_count(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(net.layers[i].index, i);
  EXPECT_EQ(net.layers[0].name, "conv_a");
  EXPECT_TRUE(net.blocks.empty());
}

TEST(LoadDescriptor, DuplicateIndexIsRejected) {
  TempDir dir;
  auto j = nlohmann::json::parse(kThreeLayer);
  j["layers"][0]["index"] = 1;
  try {
    load_descriptor(dir.write("dup.json", j.dump()));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate layer index 1"), std::string::npos) << e.what();
  }
}

TEST(LoadDescriptor, MissingFieldAndBadJson) {
  TempDir dir;
  auto j = nlohmann::json::parse(kThreeLayer);
  j["layers"][1].erase("flops");
  EXPECT_THROW(load_descriptor(dir.write("a.json", j.dump())), ValidationError);
  j = nlohmann::json::parse(kThreeLayer);
  j["layers"][1]["flops"] = -5;
  EXPECT_THROW(load_descriptor(dir.write("b.json", j.dump())), ValidationError);
  EXPECT_THROW(load_descriptor(dir.write("c.json", "{not json")), ValidationError);
  EXPECT_THROW(load_descriptor(dir.file("absent.json")), ConfigError);
}

TEST(LoadDescriptor, GapInIndices) {
  auto j = nlohmann::json::parse(kThreeLayer);
  j["layers"][0]["index"] = 5;
  EXPECT_THROW(descriptor_from_json(j), ValidationError);
}

TEST(LoadDescriptor, InceptionLikeBlocksRoundTrip) {
  TempDir dir;
  const auto net = inception_like();
  const auto path = dir.write("inc.json", to_json(net).dump(2));
  const auto back = load_descriptor(path);
  EXPECT_EQ(back.blocks.size(), 11u);
  EXPECT_EQ(back, net);
  EXPECT_EQ(to_json(back), to_json(net));
  EXPECT_EQ(enumerate_blockwise(back).size(), 12u);
}

TEST(Validate, BlockInvariants) {
  auto base = make_net("n", 6, {3, 3});
  {
    auto n = base;
    n.blocks[1].first_index = 2;  // overlap
    EXPECT_THROW(validate(n), ValidationError);
  }
  {
    auto n = base;
    n.blocks[1].block_id = "b0";
    EXPECT_THROW(validate(n), ValidationError);
  }
  {
    auto n = base;
    n.blocks[0].first_index = 1;  // leaves index 0 outside the prefix
    EXPECT_THROW(validate(n), ValidationError);
  }
  {
    auto n = base;
    n.blocks[1].last_index = 6;
    EXPECT_THROW(validate(n), ValidationError);
  }
  {
    auto n = base;
    n.layers[4].block_id = "b0";
    EXPECT_THROW(validate(n), ValidationError);
  }
  {
    auto n = base;
    n.layers[4].block_id = "nope";
    EXPECT_THROW(validate(n), ValidationError);
  }
}

TEST(RemoveLayers, Examples) {
  const auto net = make_net("five", 5);
  EXPECT_TRUE(remove_layers(net, 0).removed_indices().empty());
  EXPECT_EQ(remove_layers(net, 2).removed_indices(), (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(remove_layers(net, 6), ConfigError);
  EXPECT_THROW(remove_layers(net, 5), ConfigError);  // nothing left
  EXPECT_EQ(remove_layers(net, 4).removed_indices().size(), 4u);
}

TEST(RemoveLayers, Monotone) {
  const auto net = make_net("n", 20);
  for (std::size_t a = 0; a < 20; ++a) {
    for (std::size_t b = a + 1; b < 20; ++b) {
      const auto ra = remove_layers(net, a).removed_indices();
      const auto rb = remove_layers(net, b).removed_indices();
      EXPECT_TRUE(std::includes(rb.begin(), rb.end(), ra.begin(), ra.end()));
      EXPECT_LT(ra.size(), rb.size());
    }
  }
}

TEST(RemoveBlocks, RejectsPartialBlock) {
  const auto net = make_net("n", 6, {3, 3});
  EXPECT_NO_THROW(remove_blocks(net, 3));
  EXPECT_THROW(remove_blocks(net, 2), ConfigError);
  EXPECT_THROW(remove_blocks(net, 6), ConfigError);
  EXPECT_EQ(remove_blocks(net, 0).granularity, Granularity::Blockwise);
}

TEST(EnumerateBlockwise, Examples) {
  const auto two = enumerate_blockwise(make_net("n", 6, {3, 3}));
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].cutpoint, 0u);
  EXPECT_EQ(two[1].cutpoint, 3u);

  const auto none = enumerate_blockwise(make_net("n", 4));
  ASSERT_EQ(none.size(), 1u);
  EXPECT_EQ(none[0].cutpoint, 0u);

  // Blocks followed by a stem layer: every block boundary is usable.
  EXPECT_EQ(enumerate_blockwise(make_net("n", 7, {3, 3})).size(), 3u);
}

TEST(EnumerateLayerwise, Examples) {
  const auto three = enumerate_layerwise(make_net("n", 3));
  ASSERT_EQ(three.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(three[i].cutpoint, i);
  EXPECT_EQ(enumerate_layerwise(make_net("n", 1)).size(), 1u);
  const auto hundred = enumerate_layerwise(make_net("n", 100));
  ASSERT_EQ(hundred.size(), 100u);
  for (std::size_t i = 1; i < hundred.size(); ++i) EXPECT_LT(hundred[i - 1].cutpoint, hundred[i].cutpoint);
}

TEST(Enumerate, PropertiesOnRandomNets) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::size_t> sizes(rng() % 8);
    std::size_t covered = 0;
    for (auto& s : sizes) covered += (s = 1 + rng() % 4);
    const std::size_t n = covered + rng() % 3 + (covered == 0 ? 1 : 0);
    const auto net = make_net("r", n, sizes);

    const auto bw = enumerate_blockwise(net);
    const auto lw = enumerate_layerwise(net);
    std::set<std::size_t> lw_cuts;
    for (const auto& s : lw) lw_cuts.insert(s.cutpoint);
    EXPECT_LE(bw.size(), net.blocks.size() + 1);
    for (const auto& s : bw) {
      EXPECT_TRUE(lw_cuts.count(s.cutpoint));
      EXPECT_LT(s.cutpoint, net.layer_count());
      const auto removed = s.removed_indices();
      const std::set<std::size_t> rs(removed.begin(), removed.end());
      for (const auto& b : net.blocks) {
        std::size_t inside = 0;
        for (std::size_t i = b.first_index; i <= b.last_index; ++i) inside += rs.count(i);
        EXPECT_TRUE(inside == 0 || inside == b.size()) << "partial block " << b.block_id;
      }
    }
  }
}

TEST(TrimmedSpec, JsonShape) {
  const auto net = make_net("n", 6, {3, 3});
  const auto j = to_json(remove_blocks(net, 3));
  EXPECT_EQ(j["source"], "n");
  EXPECT_EQ(j["cutpoint"], 3);
  EXPECT_EQ(j["removed_indices"], nlohmann::json({0, 1, 2}));
  EXPECT_EQ(j["granularity"], "blockwise");
}

TEST(Granularity, Parse) {
  EXPECT_EQ(parse_granularity("layer"), Granularity::Layerwise);
  EXPECT_EQ(parse_granularity("block"), Granularity::Blockwise);
  EXPECT_THROW(parse_granularity("tile"), ConfigError);
}
