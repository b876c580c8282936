#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsdet/anchors.hpp"
#include "tsdet/geom.hpp"

namespace tsdet {

/// Regression target of a box relative to an anchor: centre offsets in
/// anchor-size units and log size ratios. No mean/std normalisation.
struct BoxDelta {
  double tx = 0;
  double ty = 0;
  double tw = 0;
  double th = 0;

  friend bool operator==(const BoxDelta&, const BoxDelta&) = default;
};

BoxDelta encode_box(const BBox& gt, const BBox& anchor);

/// Inverse of encode_box. Throws NumericalRange if the decoded box is not
/// finite (e.g. tw large enough for exp() to overflow).
BBox decode_box(const BoxDelta& delta, const BBox& anchor);

enum class AnchorLabel { Negative, Ignore, Positive };

struct AnchorAssignment {
  AnchorLabel label = AnchorLabel::Negative;
  int gt_index = -1;   // assigned ground truth for positives, else -1
  double max_iou = 0;  // best IoU over all ground truths
  BoxDelta delta{};    // meaningful for positives only
};

struct AssignmentThresholds {
  double positive = 0.5;
  double negative = 0.4;
};

struct AssignmentResult {
  std::vector<AnchorAssignment> anchors;

  std::size_t count(AnchorLabel label) const;
};

/// Labels each anchor by its best ground-truth IoU: positive at or above
/// `positive`, negative below `negative`, ignored in between. Afterwards every
/// ground truth with a non-zero best IoU is force-matched to its best anchor
/// (lowest anchor index on ties); ground truths are visited in index order
/// and an anchor already force-matched keeps its earlier ground truth.
///
/// Throws InvalidInput on an empty anchor list and InvalidConfig unless
/// 0 <= negative <= positive <= 1.
AssignmentResult assign_anchors(std::span<const BBox> anchors, std::span<const BBox> gts,
                                AssignmentThresholds thresholds = {});

AssignmentResult assign_anchors(std::span<const Anchor> anchors, std::span<const BBox> gts,
                                AssignmentThresholds thresholds = {});

}  // namespace tsdet
