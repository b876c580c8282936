#include "tsdet/crop.hpp"

#include <algorithm>
#include <cmath>

#include "tsdet/error.hpp"
#include "tsdet/rng.hpp"

namespace tsdet {

CropWindow centered_crop(const BBox& gt_hull, int img_w, int img_h, int half_extent) {
  if (half_extent <= 0) throw InvalidConfig("crop half extent must be positive");
  const int side = 2 * half_extent;
  if (img_w < side || img_h < side) {
    throw ImageTooSmall("image " + std::to_string(img_w) + "x" + std::to_string(img_h) +
                        " cannot hold a " + std::to_string(side) + " px crop");
  }
  const double cx = gt_hull.center_x();
  const double cy = gt_hull.center_y();
  if (!(cx >= 0.0 && cx <= img_w && cy >= 0.0 && cy <= img_h)) {
    throw InvalidInput("target centre lies outside the image");
  }
  CropWindow w;
  w.width = side;
  w.height = side;
  w.x0 = std::clamp(static_cast<int>(std::floor(cx)) - half_extent, 0, img_w - side);
  w.y0 = std::clamp(static_cast<int>(std::floor(cy)) - half_extent, 0, img_h - side);
  return w;
}

std::vector<LabeledQuad> to_local(const std::vector<LabeledQuad>& labels, const CropWindow& window,
                                  double keep_fraction) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) {
    throw InvalidConfig("keep_fraction must lie in [0, 1]");
  }
  const double dx = -static_cast<double>(window.x0);
  const double dy = -static_cast<double>(window.y0);
  std::vector<LabeledQuad> out;
  for (const LabeledQuad& label : labels) {
    const BBox hull = translate(quad_to_bbox(label.quad), dx, dy);
    const auto inside = clip(hull, window.width, window.height);
    if (!inside || inside->area() < keep_fraction * hull.area()) continue;
    if (*inside == hull) {
      out.push_back({translate(label.quad, dx, dy), label.class_id});
    } else {
      out.push_back({bbox_to_quad(*inside), label.class_id});
    }
  }
  return out;
}

LabeledCrop extract_crop(const ImageBuffer& source, const std::vector<LabeledQuad>& labels,
                         const CropWindow& window, double keep_fraction) {
  LabeledCrop crop;
  crop.window = window;
  crop.width = window.width;
  crop.height = window.height;
  crop.labels = to_local(labels, window, keep_fraction);
  if (!source.empty()) crop.image = source.crop(window.x0, window.y0, window.width, window.height);
  return crop;
}

LabeledCrop hflip(const LabeledCrop& crop) {
  LabeledCrop out = crop;
  const auto mirror = [&](Point p) { return Point{crop.width - p.x, p.y}; };
  for (LabeledQuad& label : out.labels) {
    const auto& c = label.quad.corners;
    label.quad.corners = {mirror(c[1]), mirror(c[0]), mirror(c[3]), mirror(c[2])};
  }
  if (!crop.image.empty()) {
    const int w = crop.image.width();
    for (int y = 0; y < crop.image.height(); ++y) {
      for (int x = 0; x < w; ++x) out.image.set(x, y, crop.image.at(w - 1 - x, y));
    }
  }
  return out;
}

LabeledCrop rescale(const LabeledCrop& crop, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidConfig("rescale factor must be > 0");
  if (factor == 1.0) return crop;

  LabeledCrop out;
  out.window = crop.window;
  out.width = crop.width * factor;
  out.height = crop.height * factor;
  out.labels = crop.labels;
  for (LabeledQuad& label : out.labels) {
    for (Point& p : label.quad.corners) {
      p.x *= factor;
      p.y *= factor;
    }
  }
  if (!crop.image.empty()) {
    const int sw = crop.image.width();
    const int sh = crop.image.height();
    const int nw = std::max(1, static_cast<int>(std::lround(sw * factor)));
    const int nh = std::max(1, static_cast<int>(std::lround(sh * factor)));
    out.image = ImageBuffer(nw, nh);
    for (int y = 0; y < nh; ++y) {
      const int sy = std::min(sh - 1, static_cast<int>(std::floor((y + 0.5) / factor)));
      for (int x = 0; x < nw; ++x) {
        const int sx = std::min(sw - 1, static_cast<int>(std::floor((x + 0.5) / factor)));
        out.image.set(x, y, crop.image.at(sx, sy));
      }
    }
  }
  return out;
}

std::vector<int> tile_origins(int extent, int tile, int overlap) {
  if (tile <= 0 || overlap < 0 || overlap >= tile) {
    throw InvalidConfig("tiling needs tile > overlap >= 0");
  }
  if (extent < tile) {
    throw ImageTooSmall("image extent " + std::to_string(extent) + " is smaller than tile " +
                        std::to_string(tile));
  }
  const int stride = tile - overlap;
  std::vector<int> origins;
  for (int o = 0; o + tile <= extent; o += stride) origins.push_back(o);
  if (origins.back() + tile < extent) origins.push_back(extent - tile);
  return origins;
}

std::vector<CropWindow> grid_tiles(int img_w, int img_h, int tile, int overlap) {
  const std::vector<int> xs = tile_origins(img_w, tile, overlap);
  const std::vector<int> ys = tile_origins(img_h, tile, overlap);
  std::vector<CropWindow> out;
  out.reserve(xs.size() * ys.size());
  for (int y : ys) {
    for (int x : xs) out.push_back(CropWindow{x, y, tile, tile, {}});
  }
  return out;
}

std::vector<CropWindow> random_tiles(int img_w, int img_h, int n, std::uint64_t seed, int tile) {
  if (n <= 0) throw InvalidInput("random_tiles needs n > 0");
  if (tile <= 0) throw InvalidConfig("tile size must be positive");
  if (img_w < tile || img_h < tile) throw ImageTooSmall("image is smaller than a tile");
  Rng rng(seed);
  std::vector<CropWindow> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto x = static_cast<int>(rng.uniform_int(0, img_w - tile));
    const auto y = static_cast<int>(rng.uniform_int(0, img_h - tile));
    out.push_back(CropWindow{x, y, tile, tile, {}});
  }
  return out;
}

}  // namespace tsdet
