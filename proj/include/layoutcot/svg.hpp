#pragma once

#include <map>
#include <optional>
#include <string>

#include "layoutcot/layout.hpp"
#include "layoutcot/raster.hpp"

namespace layoutcot {

struct RenderStyle {
  // Overrides the palette color ("#rrggbb") of individual labels.
  std::map<std::string, std::string> fill;
  double opacity = 0.45;
  double stroke_width = 2.0;
  bool show_labels = true;
  bool show_background = true;
};

/// Palette color of a label, fixed by a hash of its name.
std::string label_color(const std::string& label);

/// SVG document with a canvas-sized viewBox and one rect per element, drawn
/// in element order. Unit-canvas layouts are drawn at their original pixel
/// size when known, otherwise on a 1000-unit canvas. The background raster,
/// when given and enabled, is embedded as a stretched grayscale bitmap.
std::string render_svg(const Layout& layout, const RenderStyle& style = {},
                       const std::optional<SaliencyRaster>& background = std::nullopt);

}  // namespace layoutcot
