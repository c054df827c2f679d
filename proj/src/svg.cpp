#include "layoutcot/svg.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace layoutcot {

namespace {

constexpr const char* kPalette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4",
                                    "#f032e6", "#bfef45", "#469990", "#9a6324", "#800000", "#000075"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

void put_le(std::string& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// 24-bit bottom-up BMP.
std::string encode_bmp(const SaliencyRaster& r) {
  const std::uint32_t row = static_cast<std::uint32_t>((r.width * 3 + 3) & ~std::size_t{3});
  const std::uint32_t data = row * static_cast<std::uint32_t>(r.height);
  std::string out = "BM";
  put_le(out, 54 + data, 4);
  put_le(out, 0, 4);
  put_le(out, 54, 4);
  put_le(out, 40, 4);
  put_le(out, static_cast<std::uint32_t>(r.width), 4);
  put_le(out, static_cast<std::uint32_t>(r.height), 4);
  put_le(out, 1, 2);
  put_le(out, 24, 2);
  put_le(out, 0, 4);
  put_le(out, data, 4);
  put_le(out, 2835, 4);
  put_le(out, 2835, 4);
  put_le(out, 0, 4);
  put_le(out, 0, 4);
  for (std::size_t y = r.height; y-- > 0;) {
    std::size_t written = 0;
    for (std::size_t x = 0; x < r.width; ++x) {
      const auto g = static_cast<char>(std::lround(std::clamp(r.at(x, y), 0.0, 1.0) * 255.0));
      out.append(3, g);
      written += 3;
    }
    out.append(row - written, '\0');
  }
  return out;
}

std::string base64(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace

std::string label_color(const std::string& label) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : label) {
    h ^= c;
    h *= 16777619u;
  }
  return kPalette[h % std::size(kPalette)];
}

std::string render_svg(const Layout& layout, const RenderStyle& style,
                       const std::optional<SaliencyRaster>& background) {
  Layout l = denormalize(layout);
  if (l.is_unit_canvas()) {
    for (auto& e : l.elements) {
      e.bbox = {e.bbox.left * 1000.0, e.bbox.top * 1000.0, e.bbox.width * 1000.0, e.bbox.height * 1000.0};
    }
    l.canvas.width = l.canvas.height = 1000.0;
  }
  const std::string w = num(l.canvas.width), h = num(l.canvas.height);
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h + "\" viewBox=\"0 0 " + w +
         " " + h + "\">\n";
  out += "  <rect class=\"canvas\" x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h +
         "\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  if (background && style.show_background && background->width > 0 && background->height > 0) {
    out += "  <image x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h +
           "\" preserveAspectRatio=\"none\" href=\"data:image/bmp;base64," + base64(encode_bmp(*background)) +
           "\"/>\n";
  }
  for (const auto& e : l.elements) {
    const auto it = style.fill.find(e.label);
    const std::string color = it != style.fill.end() ? it->second : label_color(e.label);
    out += "  <rect class=\"" + escape(e.label) + "\" x=\"" + num(e.bbox.left) + "\" y=\"" + num(e.bbox.top) +
           "\" width=\"" + num(e.bbox.width) + "\" height=\"" + num(e.bbox.height) + "\" fill=\"" + escape(color) +
           "\" fill-opacity=\"" + num(style.opacity) + "\" stroke=\"" + escape(color) + "\" stroke-width=\"" +
           num(style.stroke_width) + "\"/>\n";
  }
  if (style.show_labels) {
    for (const auto& e : l.elements) {
      out += "  <text x=\"" + num(e.bbox.left + 4.0) + "\" y=\"" + num(e.bbox.top + 14.0) +
             "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#000000\">" + escape(e.label) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace layoutcot
