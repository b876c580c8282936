#include "tsdet/target_coding.hpp"

#include <algorithm>
#include <cmath>

#include "tsdet/error.hpp"

namespace tsdet {

BoxDelta encode_box(const BBox& gt, const BBox& anchor) {
  const double aw = anchor.width();
  const double ah = anchor.height();
  return {(gt.center_x() - anchor.center_x()) / aw, (gt.center_y() - anchor.center_y()) / ah,
          std::log(gt.width() / aw), std::log(gt.height() / ah)};
}

BBox decode_box(const BoxDelta& delta, const BBox& anchor) {
  const double aw = anchor.width();
  const double ah = anchor.height();
  const double cx = anchor.center_x() + delta.tx * aw;
  const double cy = anchor.center_y() + delta.ty * ah;
  const double w = aw * std::exp(delta.tw);
  const double h = ah * std::exp(delta.th);
  BBox out{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
  if (!std::isfinite(w) || !std::isfinite(h) || !is_valid(out)) {
    throw NumericalRange("decoded box is out of floating-point range");
  }
  return out;
}

std::size_t AssignmentResult::count(AnchorLabel label) const {
  return static_cast<std::size_t>(std::count_if(
      anchors.begin(), anchors.end(), [label](const AnchorAssignment& a) { return a.label == label; }));
}

AssignmentResult assign_anchors(std::span<const BBox> anchors, std::span<const BBox> gts,
                                AssignmentThresholds t) {
  if (anchors.empty()) throw InvalidInput("assign_anchors: empty anchor list");
  if (!(0.0 <= t.negative && t.negative <= t.positive && t.positive <= 1.0)) {
    throw InvalidConfig("assign_anchors: need 0 <= negative <= positive <= 1");
  }

  AssignmentResult result;
  result.anchors.resize(anchors.size());

  // Best anchor per gt, tracked during the main pass.
  std::vector<double> gt_best_iou(gts.size(), 0.0);
  std::vector<std::size_t> gt_best_anchor(gts.size(), 0);

  for (std::size_t i = 0; i < anchors.size(); ++i) {
    AnchorAssignment& a = result.anchors[i];
    int best_gt = -1;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double v = iou(anchors[i], gts[j]);
      if (v > a.max_iou) {
        a.max_iou = v;
        best_gt = static_cast<int>(j);
      }
      if (v > gt_best_iou[j]) {
        gt_best_iou[j] = v;
        gt_best_anchor[j] = i;
      }
    }
    if (best_gt >= 0 && a.max_iou >= t.positive) {
      a.label = AnchorLabel::Positive;
      a.gt_index = best_gt;
    } else if (a.max_iou < t.negative) {
      a.label = AnchorLabel::Negative;
    } else {
      a.label = AnchorLabel::Ignore;
    }
  }

  std::vector<bool> forced(anchors.size(), false);
  for (std::size_t j = 0; j < gts.size(); ++j) {
    if (gt_best_iou[j] <= 0.0) continue;
    const std::size_t i = gt_best_anchor[j];
    if (forced[i]) continue;
    forced[i] = true;
    result.anchors[i].label = AnchorLabel::Positive;
    result.anchors[i].gt_index = static_cast<int>(j);
  }

  for (std::size_t i = 0; i < anchors.size(); ++i) {
    AnchorAssignment& a = result.anchors[i];
    if (a.label == AnchorLabel::Positive) {
      a.delta = encode_box(gts[static_cast<std::size_t>(a.gt_index)], anchors[i]);
    }
  }
  return result;
}

AssignmentResult assign_anchors(std::span<const Anchor> anchors, std::span<const BBox> gts,
                                AssignmentThresholds thresholds) {
  std::vector<BBox> boxes;
  boxes.reserve(anchors.size());
  for (const Anchor& a : anchors) boxes.push_back(a.bbox);
  return assign_anchors(std::span<const BBox>(boxes), gts, thresholds);
}

}  // namespace tsdet
