#pragma once

// Brute-force reference implementations used only by tests. Each one is
// written independently of the library code path it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tsdet/anchors.hpp"
#include "tsdet/eval.hpp"
#include "tsdet/geom.hpp"
#include "tsdet/target_coding.hpp"

namespace tsdet::oracle {

// IoU by counting cells of a grid with `cells_per_px` subdivisions per
// pixel. Exact for boxes whose coordinates are multiples of 1/cells_per_px.
inline double rasterized_iou(const BBox& a, const BBox& b, int cells_per_px = 1) {
  const double step = 1.0 / cells_per_px;
  const double x0 = std::min(a.xmin, b.xmin), x1 = std::max(a.xmax, b.xmax);
  const double y0 = std::min(a.ymin, b.ymin), y1 = std::max(a.ymax, b.ymax);
  const auto inside = [](const BBox& r, double x, double y) {
    return x > r.xmin && x < r.xmax && y > r.ymin && y < r.ymax;
  };
  long inter = 0, uni = 0;
  const long nx = std::lround((x1 - x0) / step), ny = std::lround((y1 - y0) / step);
  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      const double cx = x0 + (i + 0.5) * step, cy = y0 + (j + 0.5) * step;
      const bool ia = inside(a, cx, cy), ib = inside(b, cx, cy);
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Anchor count by walking every level, cell and shape.
inline std::size_t enumerate_anchor_count(const AnchorConfig& cfg, int w, int h) {
  std::size_t n = 0;
  for (const auto& level : cfg.levels) {
    int rows = 0, cols = 0;
    while (rows * level.stride < h) ++rows;
    while (cols * level.stride < w) ++cols;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        for (std::size_t k = 0; k < cfg.ratios.size(); ++k)
          for (std::size_t s = 0; s < cfg.scales.size(); ++s) ++n;
  }
  return n;
}

struct RefLabel {
  AnchorLabel label;
  int gt;
};

// O(|anchors| * |gts|) assignment: threshold pass, then force-match pass
// with lowest-index tie breaks and first-come ownership of forced anchors.
inline std::vector<RefLabel> brute_force_assign(const std::vector<BBox>& anchors, const std::vector<BBox>& gts,
                                                double pos, double neg) {
  std::vector<RefLabel> out;
  for (const BBox& a : anchors) {
    double best = 0;
    int arg = -1;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double v = rasterized_iou(a, gts[j]);
      if (v > best) best = v, arg = static_cast<int>(j);
    }
    if (arg >= 0 && best >= pos) out.push_back({AnchorLabel::Positive, arg});
    else if (best < neg) out.push_back({AnchorLabel::Negative, -1});
    else out.push_back({AnchorLabel::Ignore, -1});
  }
  std::vector<int> forced_by(anchors.size(), -1);
  for (std::size_t j = 0; j < gts.size(); ++j) {
    double best = 0;
    int arg = -1;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      const double v = rasterized_iou(anchors[i], gts[j]);
      if (v > best) best = v, arg = static_cast<int>(i);
    }
    if (arg < 0 || forced_by[static_cast<std::size_t>(arg)] >= 0) continue;
    forced_by[static_cast<std::size_t>(arg)] = static_cast<int>(j);
    out[static_cast<std::size_t>(arg)] = {AnchorLabel::Positive, static_cast<int>(j)};
  }
  return out;
}

// Textbook O(n^2) NMS: repeatedly take the best remaining candidate and
// strike out same-class candidates above the threshold.
inline std::vector<Detection> brute_force_nms(std::vector<Detection> dets, double thresh) {
  std::vector<std::size_t> idx(dets.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto better = [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    if (dets[a].class_id != dets[b].class_id) return dets[a].class_id < dets[b].class_id;
    return a < b;
  };
  std::vector<bool> alive(dets.size(), true);
  std::vector<Detection> out;
  for (;;) {
    std::size_t best = dets.size();
    for (std::size_t i : idx)
      if (alive[i] && (best == dets.size() || better(i, best))) best = i;
    if (best == dets.size()) break;
    alive[best] = false;
    out.push_back(dets[best]);
    for (std::size_t i : idx) {
      if (!alive[i] || dets[i].class_id != dets[best].class_id) continue;
      const double ix = std::max(0.0, std::min(dets[i].bbox.xmax, dets[best].bbox.xmax) -
                                          std::max(dets[i].bbox.xmin, dets[best].bbox.xmin));
      const double iy = std::max(0.0, std::min(dets[i].bbox.ymax, dets[best].bbox.ymax) -
                                          std::max(dets[i].bbox.ymin, dets[best].bbox.ymin));
      const double inter = ix * iy;
      const double v = inter / (dets[i].bbox.area() + dets[best].bbox.area() - inter);
      if (v > thresh) alive[i] = false;
    }
  }
  return out;
}

// Largest number of pred/gt pairs with IoU strictly above the gate, by
// exhaustive search over assignments.
inline std::size_t max_gated_matching(const std::vector<BBox>& preds, const std::vector<BBox>& gts, double gate) {
  std::vector<bool> used(gts.size(), false);
  std::function<std::size_t(std::size_t)> go = [&](std::size_t p) -> std::size_t {
    if (p == preds.size()) return 0;
    std::size_t best = go(p + 1);
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || !(iou(preds[p], gts[g]) > gate)) continue;
      used[g] = true;
      best = std::max(best, 1 + go(p + 1));
      used[g] = false;
    }
    return best;
  };
  return go(0);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace tsdet::oracle
