#include "tsdet/anchors.hpp"

#include <cmath>

#include "tsdet/error.hpp"

namespace tsdet {

AnchorConfig AnchorConfig::defaults() {
  AnchorConfig cfg;
  cfg.levels = {{"P3", 8, 32.0}, {"P4", 16, 64.0}, {"P5", 32, 128.0}, {"P6", 64, 256.0},
                {"P7", 128, 512.0}};
  cfg.ratios = {0.5, 1.0, 2.0};
  cfg.scales = {0.1, 0.2, 0.5, 0.8, 1.0, 1.5};
  return cfg;
}

void AnchorConfig::validate() const {
  if (levels.empty()) throw InvalidConfig("anchor config has no pyramid levels");
  if (ratios.empty() || scales.empty()) throw InvalidConfig("anchor config needs ratios and scales");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].stride <= 0 || !(levels[i].base_size > 0.0)) {
      throw InvalidConfig("level " + levels[i].name + " has a non-positive stride or base size");
    }
    if (i > 0 && levels[i].stride <= levels[i - 1].stride) {
      throw InvalidConfig("anchor strides must be strictly increasing");
    }
    if (i > 0 && levels[i].base_size <= levels[i - 1].base_size) {
      throw InvalidConfig("anchor base sizes must be strictly increasing");
    }
  }
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidConfig("anchor ratios must be positive");
  }
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidConfig("anchor scales must be positive");
  }
}

AnchorShape anchor_shape(double base_size, double scale, double ratio) {
  if (!(base_size > 0.0) || !(scale > 0.0) || !(ratio > 0.0)) {
    throw InvalidConfig("anchor_shape arguments must be positive");
  }
  const double side = base_size * scale;
  const double root = std::sqrt(ratio);
  return {side / root, side * root};
}

GridSize level_grid_size(int input_w, int input_h, int stride) {
  if (input_w <= 0 || input_h <= 0 || stride <= 0) {
    throw InvalidConfig("grid size needs positive input size and stride");
  }
  return {(input_h + stride - 1) / stride, (input_w + stride - 1) / stride};
}

Point anchor_center(int row, int col, int stride) {
  return {(col + 0.5) * stride, (row + 0.5) * stride};
}

std::size_t pyramid_size(const AnchorConfig& cfg, int input_w, int input_h) {
  cfg.validate();
  std::size_t total = 0;
  for (const PyramidLevel& level : cfg.levels) {
    const GridSize g = level_grid_size(input_w, input_h, level.stride);
    total += static_cast<std::size_t>(g.rows) * static_cast<std::size_t>(g.cols);
  }
  return total * cfg.anchors_per_location();
}

std::vector<Anchor> generate_pyramid(const AnchorConfig& cfg, int input_w, int input_h) {
  cfg.validate();
  std::vector<Anchor> out;
  out.reserve(pyramid_size(cfg, input_w, input_h));

  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const PyramidLevel& level = cfg.levels[li];
    const GridSize g = level_grid_size(input_w, input_h, level.stride);

    // Shapes depend only on the level, not on the cell.
    std::vector<AnchorShape> shapes;
    shapes.reserve(cfg.anchors_per_location());
    for (double ratio : cfg.ratios) {
      for (double scale : cfg.scales) shapes.push_back(anchor_shape(level.base_size, scale, ratio));
    }

    for (int row = 0; row < g.rows; ++row) {
      for (int col = 0; col < g.cols; ++col) {
        const Point c = anchor_center(row, col, level.stride);
        for (std::size_t si = 0; si < shapes.size(); ++si) {
          const double hw = 0.5 * shapes[si].width;
          const double hh = 0.5 * shapes[si].height;
          Anchor a;
          a.bbox = BBox{c.x - hw, c.y - hh, c.x + hw, c.y + hh};
          a.level = static_cast<int>(li);
          a.row = row;
          a.col = col;
          a.ratio_index = static_cast<int>(si / cfg.scales.size());
          a.scale_index = static_cast<int>(si % cfg.scales.size());
          out.push_back(a);
        }
      }
    }
  }
  return out;
}

}  // namespace tsdet
