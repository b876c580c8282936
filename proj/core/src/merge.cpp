#include "tsdet/merge.hpp"

#include <algorithm>
#include <numeric>

#include "tsdet/error.hpp"

namespace tsdet {

std::vector<Detection> to_global(const TileDetections& td) {
  std::vector<Detection> out = td.detections;
  for (Detection& d : out) d.bbox = translate(d.bbox, td.window.x0, td.window.y0);
  return out;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_thresh) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return dets[a].class_id < dets[b].class_id;
  });

  // Kept boxes bucketed per class so suppression only scans its own class.
  std::vector<std::vector<BBox>> kept_by_class;
  std::vector<int> class_slot;  // class_id -> bucket, grown on demand
  std::vector<Detection> out;
  for (std::size_t idx : order) {
    const Detection& d = dets[idx];
    const auto cid = static_cast<std::size_t>(std::max(d.class_id, 0));
    if (cid >= class_slot.size()) class_slot.resize(cid + 1, -1);
    if (class_slot[cid] < 0) {
      class_slot[cid] = static_cast<int>(kept_by_class.size());
      kept_by_class.emplace_back();
    }
    auto& kept = kept_by_class[static_cast<std::size_t>(class_slot[cid])];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const BBox& k) {
      return iou(k, d.bbox) > iou_thresh;
    });
    if (suppressed) continue;
    kept.push_back(d.bbox);
    out.push_back(d);
  }
  return out;
}

std::vector<Detection> merge_tiles(std::span<const TileDetections> tiles, double iou_thresh) {
  std::vector<Detection> all;
  for (const TileDetections& td : tiles) {
    if (td.window.source != tiles.front().window.source) {
      throw InvalidInput("merge_tiles: tiles from different source images ('" +
                         tiles.front().window.source + "' and '" + td.window.source + "')");
    }
    const std::vector<Detection> g = to_global(td);
    all.insert(all.end(), g.begin(), g.end());
  }
  return nms(all, iou_thresh);
}

std::vector<Detection> drop_border_detections(const TileDetections& td, int img_w, int img_h,
                                              double margin) {
  const CropWindow& w = td.window;
  const bool left_open = w.x0 > 0;
  const bool top_open = w.y0 > 0;
  const bool right_open = w.x0 + w.width < img_w;
  const bool bottom_open = w.y0 + w.height < img_h;
  std::vector<Detection> out;
  for (const Detection& d : td.detections) {
    const BBox& b = d.bbox;
    if (left_open && b.xmin < margin) continue;
    if (top_open && b.ymin < margin) continue;
    if (right_open && b.xmax > w.width - margin) continue;
    if (bottom_open && b.ymax > w.height - margin) continue;
    out.push_back(d);
  }
  return out;
}

}  // namespace tsdet
