#pragma once

#include <span>
#include <vector>

#include "tsdet/crop.hpp"
#include "tsdet/geom.hpp"

namespace tsdet {

inline constexpr double kDefaultNmsIou = 0.5;

/// Detections produced on one tile, in tile-local coordinates.
struct TileDetections {
  CropWindow window;
  std::vector<Detection> detections;
};

/// Translates every detection by the window origin.
std::vector<Detection> to_global(const TileDetections& td);

/// Class-aware greedy NMS. Candidates are ranked by descending score, then
/// ascending class id, then input order; a candidate survives iff its IoU
/// with every kept detection of the same class is <= iou_thresh. The output
/// is in rank order.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_thresh = kDefaultNmsIou);

/// nms over the union of all tiles mapped to global coordinates. Every tile
/// must come from the same source image, otherwise InvalidInput.
std::vector<Detection> merge_tiles(std::span<const TileDetections> tiles,
                                   double iou_thresh = kDefaultNmsIou);

/// Drops detections touching a tile edge that is not also an image edge.
/// With tile overlap larger than the biggest object, each object has an
/// uncut copy in some tile, and the cut copies would otherwise survive NMS
/// because their IoU with the full box is small.
std::vector<Detection> drop_border_detections(const TileDetections& td, int img_w, int img_h,
                                              double margin = 0.5);

}  // namespace tsdet
