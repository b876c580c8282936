#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles/oracles.hpp"
#include "tsdet/error.hpp"
#include "tsdet/merge.hpp"

namespace tsdet {
namespace {

TEST(ToGlobal, TranslatesByOrigin) {
  const TileDetections td{{800, 400, 400, 400, "a"}, {{{10, 20, 60, 70}, 3, 0.9}}};
  const auto g = to_global(td);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].bbox, (BBox{810, 420, 860, 470}));
  EXPECT_EQ(g[0].class_id, 3);

  const TileDetections at_zero{{0, 0, 400, 400, "a"}, {{{10, 20, 60, 70}, 3, 0.9}}};
  EXPECT_EQ(to_global(at_zero)[0].bbox, (BBox{10, 20, 60, 70}));
  EXPECT_EQ(translate(g[0].bbox, -800, -400), (BBox{10, 20, 60, 70}));
}

TEST(Nms, SuppressesSameClassOverlap) {
  // [0,0,100,100] vs [0,0,100,80]: IoU 0.8.
  const std::vector<Detection> dets{{{0, 0, 100, 80}, 2, 0.7}, {{0, 0, 100, 100}, 2, 0.9}};
  const auto out = nms(dets, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].score, 0.9);
  EXPECT_EQ(out, oracle::brute_force_nms(dets, 0.5));
}

TEST(Nms, DifferentClassesSurvive) {
  const std::vector<Detection> dets{{{0, 0, 100, 80}, 1, 0.7}, {{0, 0, 100, 100}, 2, 0.9}};
  EXPECT_EQ(nms(dets, 0.5).size(), 2u);
}

TEST(Nms, DisjointBoxesKeptInScoreOrder) {
  const std::vector<Detection> dets{
      {{0, 0, 10, 10}, 1, 0.2}, {{20, 0, 30, 10}, 1, 0.8}, {{40, 0, 50, 10}, 1, 0.5}};
  const auto out = nms(dets, 0.5);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_DOUBLE_EQ(out[0].score, 0.8);
  EXPECT_DOUBLE_EQ(out[1].score, 0.5);
  EXPECT_DOUBLE_EQ(out[2].score, 0.2);
}

TEST(Nms, ThresholdIsInclusiveForKeeping) {
  // IoU exactly 0.5 is not above the threshold, so both stay.
  const std::vector<Detection> dets{{{0, 0, 10, 10}, 1, 0.9}, {{0, 0, 10, 5}, 1, 0.8}};
  EXPECT_EQ(nms(dets, 0.5).size(), 2u);
}

TEST(MergeTiles, SingleTileUnchanged) {
  const TileDetections td{{300, 0, 400, 400, "a"}, {{{10, 10, 50, 50}, 1, 0.9}, {{100, 100, 150, 150}, 2, 0.8}}};
  const std::vector<TileDetections> tiles{td};
  EXPECT_EQ(merge_tiles(tiles), to_global(td));
  EXPECT_TRUE(merge_tiles(std::vector<TileDetections>{}).empty());
}

TEST(MergeTiles, DuplicateAcrossOverlap) {
  // Same sign seen from two tiles; the second copy is one pixel narrower
  // on a 20-wide box, so the global IoU is 0.95.
  const TileDetections left{{0, 0, 400, 400, "a"}, {{{320, 100, 340, 140}, 7, 0.8}}};
  const TileDetections right{{300, 0, 400, 400, "a"}, {{{20, 100, 39, 140}, 7, 0.75}}};
  EXPECT_NEAR(iou(to_global(left)[0].bbox, to_global(right)[0].bbox), 0.95, 1e-12);
  const std::vector<TileDetections> tiles{left, right};
  const auto out = merge_tiles(tiles);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].score, 0.8);
  std::vector<Detection> all = to_global(left);
  for (const auto& d : to_global(right)) all.push_back(d);
  EXPECT_EQ(out, oracle::brute_force_nms(all, 0.5));
}

TEST(MergeTiles, MixedSourcesRejected) {
  const std::vector<TileDetections> tiles{{{0, 0, 400, 400, "a"}, {}}, {{0, 0, 400, 400, "b"}, {}}};
  EXPECT_THROW(merge_tiles(tiles), InvalidInput);
}

std::vector<Detection> random_dets(std::mt19937& gen, int n, bool distinct_scores) {
  std::uniform_int_distribution<int> pos(0, 60), size(5, 40), cls(0, 3), score(0, 10);
  std::uniform_real_distribution<double> fine(0.0, 1.0);
  std::vector<Detection> out;
  for (int i = 0; i < n; ++i) {
    const double x = pos(gen), y = pos(gen);
    out.push_back({{x, y, x + size(gen), y + size(gen)}, cls(gen), distinct_scores ? fine(gen) : score(gen) / 10.0});
  }
  return out;
}

TEST(Nms, MatchesBruteForce) {
  std::mt19937 gen(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto dets = random_dets(gen, std::uniform_int_distribution<int>(0, 40)(gen), trial % 2 == 0);
    ASSERT_EQ(nms(dets, 0.5), oracle::brute_force_nms(dets, 0.5)) << "trial " << trial;
  }
}

TEST(Nms, Idempotent) {
  std::mt19937 gen(78);
  for (int trial = 0; trial < 200; ++trial) {
    const auto once = nms(random_dets(gen, 30, false), 0.5);
    EXPECT_EQ(nms(once, 0.5), once);
  }
}

TEST(Nms, InvariantUnderShuffleWithDistinctScores) {
  std::mt19937 gen(79);
  for (int trial = 0; trial < 200; ++trial) {
    auto dets = random_dets(gen, 30, true);
    const auto ref = nms(dets, 0.5);
    std::shuffle(dets.begin(), dets.end(), gen);
    EXPECT_EQ(nms(dets, 0.5), ref);
  }
}

TEST(DropBorder, KeepsImageEdgesDropsInnerCuts) {
  const CropWindow w{300, 0, 400, 400, "a"};
  const TileDetections td{w,
                          {{{0, 50, 20, 80}, 1, 1.0},      // cut by the left tile edge
                           {{100, 0, 130, 30}, 2, 1.0},    // touches the image top
                           {{100, 100, 130, 130}, 3, 1.0},  // interior
                           {{380, 200, 400, 230}, 4, 1.0}}};  // cut by the right tile edge
  const auto kept = drop_border_detections(td, 3200, 1800);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].class_id, 2);
  EXPECT_EQ(kept[1].class_id, 3);

  const TileDetections corner{{2800, 1400, 400, 400, "a"}, {{{380, 380, 400, 400}, 5, 1.0}}};
  EXPECT_EQ(drop_border_detections(corner, 3200, 1800).size(), 1u);
}

}  // namespace
}  // namespace tsdet
