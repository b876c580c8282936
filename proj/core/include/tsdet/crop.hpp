#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsdet/geom.hpp"
#include "tsdet/image.hpp"

namespace tsdet {

inline constexpr int kDefaultCropHalfExtent = 200;
inline constexpr int kDefaultTileSize = 400;
inline constexpr int kDefaultTileOverlap = 100;
inline constexpr double kDefaultKeepFraction = 0.5;

/// Placement of a sub-image inside its source image.
struct CropWindow {
  int x0 = 0;
  int y0 = 0;
  int width = kDefaultTileSize;
  int height = kDefaultTileSize;
  std::string source;

  BBox bounds() const {
    return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + width),
            static_cast<double>(y0 + height)};
  }

  friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

struct LabeledQuad {
  Quad quad;
  int class_id = 0;

  friend bool operator==(const LabeledQuad&, const LabeledQuad&) = default;
};

/// A crop with labels in its local frame. `width`/`height` are the extents
/// of the local coordinate frame; they equal the window size until the crop
/// is rescaled. `image` may be empty when only labels are being processed.
struct LabeledCrop {
  CropWindow window;
  double width = 0;
  double height = 0;
  std::vector<LabeledQuad> labels;
  ImageBuffer image;

  friend bool operator==(const LabeledCrop&, const LabeledCrop&) = default;
};

/// Window of side 2*half_extent centred on the hull centre, shifted (never
/// shrunk) to lie inside the image. Throws ImageTooSmall if the image cannot
/// hold the window and InvalidInput if the hull centre is outside the image.
CropWindow centered_crop(const BBox& gt_hull, int img_w, int img_h,
                         int half_extent = kDefaultCropHalfExtent);

/// Rewrites global labels into the window's frame. A label is kept when at
/// least keep_fraction of its hull area lies inside the window. Labels fully
/// inside are translated corner by corner; cut labels become the rectangle
/// of their clipped hull.
std::vector<LabeledQuad> to_local(const std::vector<LabeledQuad>& labels, const CropWindow& window,
                                  double keep_fraction = kDefaultKeepFraction);

/// Builds a crop (labels and, when `source` is non-empty, pixels).
LabeledCrop extract_crop(const ImageBuffer& source, const std::vector<LabeledQuad>& labels,
                         const CropWindow& window, double keep_fraction = kDefaultKeepFraction);

/// Mirror horizontally: x -> width - x. Corners are re-ordered so the quad
/// keeps upper-left / upper-right / bottom-left / bottom-right semantics.
LabeledCrop hflip(const LabeledCrop& crop);

/// Scales coordinates by `factor` and resamples pixels nearest-neighbour to
/// round(width*factor) x round(height*factor). Throws InvalidConfig for
/// factor <= 0.
LabeledCrop rescale(const LabeledCrop& crop, double factor);

/// Deterministic tiling with stride tile - overlap and a final tile clamped
/// to the far edge, row-major. Throws InvalidConfig unless
/// tile > overlap >= 0 and ImageTooSmall if the image is smaller than a tile.
std::vector<CropWindow> grid_tiles(int img_w, int img_h, int tile = kDefaultTileSize,
                                   int overlap = kDefaultTileOverlap);

/// n windows with origins uniform over all valid placements.
std::vector<CropWindow> random_tiles(int img_w, int img_h, int n, std::uint64_t seed,
                                     int tile = kDefaultTileSize);

/// Tile origins along one axis of length `extent`.
std::vector<int> tile_origins(int extent, int tile, int overlap);

}  // namespace tsdet
