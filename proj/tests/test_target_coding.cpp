#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "tsdet/error.hpp"
#include "tsdet/target_coding.hpp"

namespace tsdet {
namespace {

BBox centered(double cx, double cy, double w, double h) {
  return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

TEST(EncodeBox, Examples) {
  const BBox anchor = centered(50, 50, 32, 32);
  EXPECT_EQ(encode_box(anchor, anchor), (BoxDelta{0, 0, 0, 0}));

  const BoxDelta shifted = encode_box(centered(54, 50, 32, 32), anchor);
  EXPECT_DOUBLE_EQ(shifted.tx, 0.125);
  EXPECT_DOUBLE_EQ(shifted.ty, 0.0);
  EXPECT_DOUBLE_EQ(shifted.tw, 0.0);
  EXPECT_DOUBLE_EQ(shifted.th, 0.0);

  const BoxDelta grown = encode_box(centered(50, 50, 64, 64), anchor);
  EXPECT_DOUBLE_EQ(grown.tx, 0.0);
  EXPECT_DOUBLE_EQ(grown.tw, std::log(2.0));
  EXPECT_DOUBLE_EQ(grown.th, std::log(2.0));
}

TEST(DecodeBox, Examples) {
  const BBox anchor = centered(50, 50, 32, 32);
  EXPECT_EQ(decode_box({0, 0, 0, 0}, anchor), anchor);
  const BBox b = decode_box({0.125, 0, 0, 0}, anchor);
  EXPECT_DOUBLE_EQ(b.center_x(), 54);
  EXPECT_DOUBLE_EQ(b.center_y(), 50);
  EXPECT_DOUBLE_EQ(b.width(), 32);
  EXPECT_DOUBLE_EQ(b.height(), 32);
}

TEST(DecodeBox, OverflowIsNumericalRange) {
  const BBox anchor = centered(50, 50, 32, 32);
  EXPECT_THROW(decode_box({0, 0, 1000, 0}, anchor), NumericalRange);
  EXPECT_THROW(decode_box({0, 0, 0, -1000}, anchor), NumericalRange);
}

TEST(DecodeBox, RoundTripRandom) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> pos(-500, 500), size(0.5, 400);
  for (int i = 0; i < 2000; ++i) {
    const BBox g = centered(pos(gen), pos(gen), size(gen), size(gen));
    const BBox a = centered(pos(gen), pos(gen), size(gen), size(gen));
    const BBox r = decode_box(encode_box(g, a), a);
    const double scale = std::max({std::abs(g.xmin), std::abs(g.xmax), std::abs(g.ymin), std::abs(g.ymax), 1.0});
    EXPECT_NEAR(r.xmin, g.xmin, 1e-9 * scale);
    EXPECT_NEAR(r.ymin, g.ymin, 1e-9 * scale);
    EXPECT_NEAR(r.xmax, g.xmax, 1e-9 * scale);
    EXPECT_NEAR(r.ymax, g.ymax, 1e-9 * scale);
  }
}

TEST(AssignAnchors, NoGroundTruthMeansAllNegative) {
  const std::vector<BBox> anchors{{0, 0, 10, 10}, {5, 5, 20, 20}};
  const AssignmentResult r = assign_anchors(std::span<const BBox>(anchors), {});
  EXPECT_EQ(r.count(AnchorLabel::Negative), 2u);
}

TEST(AssignAnchors, ExactMatchIsPositiveWithZeroDelta) {
  const std::vector<BBox> anchors{{0, 0, 10, 10}, {100, 100, 140, 140}};
  const std::vector<BBox> gts{{100, 100, 140, 140}};
  const AssignmentResult r = assign_anchors(std::span<const BBox>(anchors), gts);
  EXPECT_EQ(r.anchors[1].label, AnchorLabel::Positive);
  EXPECT_EQ(r.anchors[1].gt_index, 0);
  EXPECT_EQ(r.anchors[1].delta, (BoxDelta{0, 0, 0, 0}));
  EXPECT_EQ(r.anchors[0].label, AnchorLabel::Negative);
}

TEST(AssignAnchors, ThresholdBands) {
  // Same-height boxes sliding along x: IoU = overlap / (200 - overlap).
  // Overlaps 75, 62.0689..., 18.1818... give IoU 0.6, 0.45, 0.1.
  const BBox gt{0, 0, 100, 10};
  const auto at_iou = [&](double v) {
    const double overlap = 200 * v / (1 + v);
    return BBox{100 - overlap, 0, 200 - overlap, 10};
  };
  const std::vector<BBox> anchors{at_iou(0.6), at_iou(0.45), at_iou(0.1)};
  EXPECT_NEAR(iou(anchors[0], gt), 0.6, 1e-12);
  EXPECT_NEAR(iou(anchors[1], gt), 0.45, 1e-12);
  EXPECT_NEAR(iou(anchors[2], gt), 0.1, 1e-12);
  const std::vector<BBox> gts{gt};
  const AssignmentResult r = assign_anchors(std::span<const BBox>(anchors), gts, {0.5, 0.4});
  EXPECT_EQ(r.anchors[0].label, AnchorLabel::Positive);
  EXPECT_EQ(r.anchors[1].label, AnchorLabel::Ignore);
  EXPECT_EQ(r.anchors[2].label, AnchorLabel::Negative);
}

TEST(AssignAnchors, ForceMatchBelowThreshold) {
  const std::vector<BBox> anchors{{0, 0, 10, 10}, {0, 0, 100, 100}};
  const std::vector<BBox> gts{{0, 0, 20, 20}};  // IoU 0.25 and 0.04
  const AssignmentResult r = assign_anchors(std::span<const BBox>(anchors), gts);
  EXPECT_EQ(r.anchors[0].label, AnchorLabel::Positive);
  EXPECT_EQ(r.anchors[0].gt_index, 0);
  EXPECT_EQ(r.anchors[1].label, AnchorLabel::Negative);
}

TEST(AssignAnchors, ForceMatchTieGoesToLowestAnchor) {
  const std::vector<BBox> anchors{{0, 0, 10, 10}, {10, 10, 20, 20}};
  const std::vector<BBox> gts{{5, 5, 15, 15}};  // 1/7 with both
  const AssignmentResult r = assign_anchors(std::span<const BBox>(anchors), gts);
  EXPECT_EQ(r.anchors[0].label, AnchorLabel::Positive);
  EXPECT_EQ(r.anchors[1].label, AnchorLabel::Negative);
}

TEST(AssignAnchors, Errors) {
  const std::vector<BBox> none;
  const std::vector<BBox> one{{0, 0, 1, 1}};
  EXPECT_THROW(assign_anchors(std::span<const BBox>(none), one), InvalidInput);
  EXPECT_THROW(assign_anchors(std::span<const BBox>(one), one, {0.3, 0.4}), InvalidConfig);
  EXPECT_THROW(assign_anchors(std::span<const BBox>(one), one, {1.5, 0.4}), InvalidConfig);
}

TEST(AssignAnchors, AnchorOverloadMatchesBoxes) {
  AnchorConfig cfg = AnchorConfig::defaults();
  cfg.levels.resize(2);
  const auto anchors = generate_pyramid(cfg, 64, 64);
  std::vector<BBox> boxes;
  for (const auto& a : anchors) boxes.push_back(a.bbox);
  const std::vector<BBox> gts{{10, 12, 40, 44}};
  const auto r1 = assign_anchors(std::span<const Anchor>(anchors), gts);
  const auto r2 = assign_anchors(std::span<const BBox>(boxes), gts);
  ASSERT_EQ(r1.anchors.size(), r2.anchors.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) EXPECT_EQ(r1.anchors[i].label, r2.anchors[i].label);
}

std::vector<BBox> random_boxes(std::mt19937& gen, int n, int extent) {
  std::uniform_int_distribution<int> c(0, extent), s(1, extent / 2);
  std::vector<BBox> out;
  for (int i = 0; i < n; ++i) {
    const double x = c(gen), y = c(gen);
    out.push_back({x, y, x + s(gen), y + s(gen)});
  }
  return out;
}

TEST(AssignAnchors, MatchesBruteForceOnRandomInstances) {
  std::mt19937 gen(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const auto anchors = random_boxes(gen, std::uniform_int_distribution<int>(1, 60)(gen), 40);
    const auto gts = random_boxes(gen, std::uniform_int_distribution<int>(0, 5)(gen), 40);
    const auto r = assign_anchors(std::span<const BBox>(anchors), gts, {0.5, 0.4});
    const auto ref = oracle::brute_force_assign(anchors, gts, 0.5, 0.4);
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      ASSERT_EQ(r.anchors[i].label, ref[i].label) << "trial " << trial << " anchor " << i;
      if (ref[i].label == AnchorLabel::Positive) ASSERT_EQ(r.anchors[i].gt_index, ref[i].gt);
    }
    // Partition and per-band invariants.
    EXPECT_EQ(r.count(AnchorLabel::Positive) + r.count(AnchorLabel::Negative) + r.count(AnchorLabel::Ignore),
              anchors.size());
    for (const auto& a : r.anchors) {
      if (a.label == AnchorLabel::Negative) EXPECT_LT(a.max_iou, 0.4);
    }
  }
}

TEST(AssignAnchors, EveryOverlappingGtGetsAPositive) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto anchors = random_boxes(gen, 80, 60);
    // Spread gts apart so they cannot share a best anchor.
    std::vector<BBox> gts;
    for (int k = 0; k < 3; ++k) gts.push_back(translate(random_boxes(gen, 1, 15)[0], 20.0 * k, 20.0 * k));
    const auto r = assign_anchors(std::span<const BBox>(anchors), gts);
    for (std::size_t j = 0; j < gts.size(); ++j) {
      bool overlaps = false, positive = false;
      for (std::size_t i = 0; i < anchors.size(); ++i) {
        overlaps |= iou(anchors[i], gts[j]) > 0;
        positive |= r.anchors[i].label == AnchorLabel::Positive && r.anchors[i].gt_index == static_cast<int>(j);
      }
      bool shared = false;
      for (std::size_t k = 0; k < j; ++k) {
        double bj = 0, bk = 0;
        std::size_t aj = 0, ak = 0;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
          if (iou(anchors[i], gts[j]) > bj) bj = iou(anchors[i], gts[j]), aj = i;
          if (iou(anchors[i], gts[k]) > bk) bk = iou(anchors[i], gts[k]), ak = i;
        }
        shared |= aj == ak;
      }
      if (overlaps && !shared) EXPECT_TRUE(positive) << "trial " << trial << " gt " << j;
    }
  }
}

}  // namespace
}  // namespace tsdet
