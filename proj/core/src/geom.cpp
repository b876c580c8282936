#include "tsdet/geom.hpp"

#include <algorithm>
#include <cmath>

#include "tsdet/error.hpp"

namespace tsdet {

bool is_valid(const BBox& b) {
  return std::isfinite(b.xmin) && std::isfinite(b.ymin) && std::isfinite(b.xmax) &&
         std::isfinite(b.ymax) && b.xmin < b.xmax && b.ymin < b.ymax;
}

bool is_valid_class(int class_id) {
  return class_id >= kMinClassId && class_id <= kMaxClassId;
}

BBox make_bbox(double xmin, double ymin, double xmax, double ymax) {
  BBox b{xmin, ymin, xmax, ymax};
  if (!is_valid(b)) {
    throw DegenerateGeometry("box [" + std::to_string(xmin) + "," + std::to_string(ymin) + "," +
                             std::to_string(xmax) + "," + std::to_string(ymax) +
                             "] has no positive area");
  }
  return b;
}

BBox quad_to_bbox(const Quad& q) {
  BBox b{q.corners[0].x, q.corners[0].y, q.corners[0].x, q.corners[0].y};
  for (const Point& p : q.corners) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DegenerateGeometry("quad has a non-finite corner");
    }
    b.xmin = std::min(b.xmin, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.xmax = std::max(b.xmax, p.x);
    b.ymax = std::max(b.ymax, p.y);
  }
  if (!(b.xmin < b.xmax && b.ymin < b.ymax)) {
    throw DegenerateGeometry("quad hull has zero width or height");
  }
  return b;
}

Quad bbox_to_quad(const BBox& b) {
  return Quad{{Point{b.xmin, b.ymin}, Point{b.xmax, b.ymin}, Point{b.xmin, b.ymax},
               Point{b.xmax, b.ymax}}};
}

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BBox translate(const BBox& b, double dx, double dy) {
  return BBox{b.xmin + dx, b.ymin + dy, b.xmax + dx, b.ymax + dy};
}

Quad translate(const Quad& q, double dx, double dy) {
  Quad out = q;
  for (Point& p : out.corners) {
    p.x += dx;
    p.y += dy;
  }
  return out;
}

std::optional<BBox> clip(const BBox& b, double w, double h) {
  BBox c{std::max(b.xmin, 0.0), std::max(b.ymin, 0.0), std::min(b.xmax, w),
         std::min(b.ymax, h)};
  if (!(c.xmin < c.xmax && c.ymin < c.ymax)) return std::nullopt;
  return c;
}

}  // namespace tsdet
