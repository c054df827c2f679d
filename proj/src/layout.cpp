#include "layoutcot/layout.hpp"

#include <algorithm>

#include "layoutcot/error.hpp"

namespace layoutcot {

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  if (a == b) return a.area() > 0.0 ? 1.0 : 0.0;
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

bool contains(const BBox& outer, const BBox& inner, double slack) {
  return outer.left <= inner.left + slack && outer.top <= inner.top + slack &&
         outer.right() + slack >= inner.right() &&
         outer.bottom() + slack >= inner.bottom();
}

Layout normalize(const Layout& layout) {
  const double w = layout.canvas.width;
  const double h = layout.canvas.height;
  if (!(w > 0.0) || !(h > 0.0)) {
    throw Error(ErrorCode::ZeroCanvas, "layout '" + layout.id + "' has canvas " +
                                           std::to_string(w) + "x" + std::to_string(h));
  }
  if (layout.is_unit_canvas()) return layout;

  Layout out = layout;
  for (auto& e : out.elements) {
    e.bbox.left /= w;
    e.bbox.width /= w;
    e.bbox.top /= h;
    e.bbox.height /= h;
  }
  out.canvas.width = 1.0;
  out.canvas.height = 1.0;
  out.meta.original_width = w;
  out.meta.original_height = h;
  return out;
}

Layout denormalize(const Layout& layout) {
  if (!layout.is_unit_canvas() || !layout.meta.original_width || !layout.meta.original_height) {
    return layout;
  }
  const double w = *layout.meta.original_width;
  const double h = *layout.meta.original_height;
  Layout out = layout;
  for (auto& e : out.elements) {
    e.bbox.left *= w;
    e.bbox.width *= w;
    e.bbox.top *= h;
    e.bbox.height *= h;
  }
  out.canvas.width = w;
  out.canvas.height = h;
  out.meta.original_width.reset();
  out.meta.original_height.reset();
  return out;
}

ValidationReport validate_layout(const Layout& layout, double min_area_ratio) {
  if (layout.empty()) return {};
  const Layout unit = normalize(layout);
  static const BBox kUnit{0.0, 0.0, 1.0, 1.0};

  ValidationReport report;
  report.element_valid.reserve(unit.elements.size());
  std::size_t valid = 0;
  for (const auto& e : unit.elements) {
    const bool ok = e.bbox.width >= 0.0 && e.bbox.height >= 0.0 &&
                    e.bbox.area() >= min_area_ratio &&
                    intersection_area(e.bbox, kUnit) > 0.0;
    report.element_valid.push_back(ok);
    if (ok) ++valid;
  }
  report.valid_fraction =
      unit.elements.empty() ? 1.0
                            : static_cast<double>(valid) / static_cast<double>(unit.elements.size());
  return report;
}

}  // namespace layoutcot
