#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace layoutcot {

/// Axis-aligned box in left-top origin coordinates. Units are canvas pixels
/// for raw layouts and canvas fractions once normalized.
struct BBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double center_x() const { return left + width / 2.0; }
  double center_y() const { return top + height / 2.0; }
  double area() const { return width * height; }

  bool operator==(const BBox&) const = default;
};

double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);
// True when `outer` contains `inner`, with `slack` tolerance on every edge.
bool contains(const BBox& outer, const BBox& inner, double slack = 1e-9);

struct Element {
  std::string label;
  BBox bbox;
  bool locked = false;

  bool operator==(const Element&) const = default;
};

struct Canvas {
  double width = 0.0;
  double height = 0.0;
  std::optional<std::string> background_ref;

  bool operator==(const Canvas&) const = default;
};

struct TaskMeta {
  // Pixel dimensions of the canvas before normalization.
  std::optional<double> original_width;
  std::optional<double> original_height;
  std::optional<std::string> source_text;

  bool operator==(const TaskMeta&) const = default;
};

struct Layout {
  std::string id;
  Canvas canvas;
  std::vector<Element> elements;
  TaskMeta meta;

  bool empty() const { return elements.empty(); }
  bool is_unit_canvas() const { return canvas.width == 1.0 && canvas.height == 1.0; }

  bool operator==(const Layout&) const = default;
};

/// Divides every box by the canvas size and records the original size in
/// `meta`. Unit canvases pass through unchanged, so the call is idempotent.
/// Throws Error(ZeroCanvas) when either canvas dimension is not positive.
Layout normalize(const Layout& layout);

/// Inverse of normalize() for layouts that still carry their original size;
/// anything else is returned as is.
Layout denormalize(const Layout& layout);

struct ValidationReport {
  std::vector<bool> element_valid;
  double valid_fraction = 1.0;
};

inline constexpr double kDefaultMinAreaRatio = 0.001;

/// An element is valid when its normalized area reaches `min_area_ratio` and
/// it overlaps the unit canvas with positive area. An empty layout is
/// vacuously valid.
ValidationReport validate_layout(const Layout& layout,
                                 double min_area_ratio = kDefaultMinAreaRatio);

}  // namespace layoutcot
