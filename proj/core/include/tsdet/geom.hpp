#pragma once

#include <array>
#include <optional>

namespace tsdet {

inline constexpr int kMinClassId = 0;
inline constexpr int kMaxClassId = 20;
inline constexpr int kNumClasses = kMaxClassId + 1;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box in continuous pixel coordinates. Area is
// (xmax - xmin) * (ymax - ymin); there is no +1 pixel convention.
struct BBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (xmin + xmax); }
  double center_y() const { return 0.5 * (ymin + ymax); }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Four labelled corners in the label-file order: upper left, upper right,
/// bottom left, bottom right. Corners need not form a rectangle.
struct Quad {
  std::array<Point, 4> corners{};

  friend bool operator==(const Quad&, const Quad&) = default;
};

struct Detection {
  BBox bbox;
  int class_id = 0;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// True when all coordinates are finite and the box has positive extent.
bool is_valid(const BBox& b);
bool is_valid_class(int class_id);

/// Validating constructor; throws DegenerateGeometry on an empty or
/// non-finite box.
BBox make_bbox(double xmin, double ymin, double xmax, double ymax);

/// Axis-aligned hull of the four corners. Throws DegenerateGeometry when a
/// corner is non-finite or the hull has zero width or height.
BBox quad_to_bbox(const Quad& q);

/// Rectangle quad with corners in label-file order.
Quad bbox_to_quad(const BBox& b);

double intersection_area(const BBox& a, const BBox& b);

/// Intersection over union of two valid boxes; in [0, 1] and symmetric.
double iou(const BBox& a, const BBox& b);

BBox translate(const BBox& b, double dx, double dy);
Quad translate(const Quad& q, double dx, double dy);

/// Intersection of b with [0,w]x[0,h]; nullopt when it has zero area.
std::optional<BBox> clip(const BBox& b, double w, double h);

}  // namespace tsdet
