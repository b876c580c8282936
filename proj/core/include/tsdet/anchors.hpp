#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tsdet/geom.hpp"

namespace tsdet {

struct PyramidLevel {
  std::string name;
  int stride = 0;        // pixels per feature-map cell
  double base_size = 0;  // side of the unit-scale square anchor
};

/// Recipe for the anchor pyramid. The defaults are P3..P7 with square base
/// anchors of 32..512 px, ratios (h/w) {1:2, 1:1, 2:1} and the six relative
/// sizes {0.1, 0.2, 0.5, 0.8, 1.0, 1.5} applied uniformly at every level.
struct AnchorConfig {
  std::vector<PyramidLevel> levels;
  std::vector<double> ratios;
  std::vector<double> scales;

  static AnchorConfig defaults();

  /// Throws InvalidConfig unless strides and base sizes are strictly
  /// increasing and every ratio and scale is positive.
  void validate() const;

  std::size_t anchors_per_location() const { return ratios.size() * scales.size(); }
};

struct Anchor {
  BBox bbox;
  int level = 0;  // index into AnchorConfig::levels
  int row = 0;
  int col = 0;
  int ratio_index = 0;
  int scale_index = 0;
};

struct AnchorShape {
  double width = 0;
  double height = 0;
};

struct GridSize {
  int rows = 0;
  int cols = 0;

  friend bool operator==(const GridSize&, const GridSize&) = default;
};

/// w = base*scale/sqrt(ratio), h = base*scale*sqrt(ratio), so w*h = (base*scale)^2.
AnchorShape anchor_shape(double base_size, double scale, double ratio);

/// Feature-map size for a stride; ceiling division on both axes.
GridSize level_grid_size(int input_w, int input_h, int stride);

/// Anchor centre for grid cell (row, col): ((col + 0.5) * stride, (row + 0.5) * stride).
Point anchor_center(int row, int col, int stride);

/// Closed-form anchor count without materialising the pyramid.
std::size_t pyramid_size(const AnchorConfig& cfg, int input_w, int input_h);

/// Every anchor for an input of the given size, ordered level-major, then
/// row, col, ratio, scale. Anchors are not clipped to the image.
std::vector<Anchor> generate_pyramid(const AnchorConfig& cfg, int input_w, int input_h);

}  // namespace tsdet
