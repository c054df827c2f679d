#include <gtest/gtest.h>

#include <regex>

#include "layoutcot/svg.hpp"

namespace lc = layoutcot;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

lc::Layout sample() {
  lc::Layout l;
  l.canvas = {300, 400, std::nullopt};
  l.elements = {{"text", {10, 10, 100, 20}, false}, {"logo", {5, 300, 40, 40}, false}, {"text", {10, 50, 100, 20}, false}};
  return l;
}

}  // namespace

TEST(Svg, OneRectPerElementInOrder) {
  const auto svg = lc::render_svg(sample());
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("viewBox=\"0 0 300 400\""), std::string::npos);
  EXPECT_EQ(count(svg, "<rect class=\"text\""), 2u);
  EXPECT_EQ(count(svg, "<rect class=\"logo\""), 1u);
  EXPECT_LT(svg.find("class=\"logo\""), svg.rfind("<rect class=\"text\""));
  EXPECT_EQ(count(svg, "<text"), 3u);
  lc::RenderStyle plain;
  plain.show_labels = false;
  EXPECT_EQ(count(lc::render_svg(sample(), plain), "<text"), 0u);
}

TEST(Svg, Deterministic) {
  EXPECT_EQ(lc::render_svg(sample()), lc::render_svg(sample()));
  EXPECT_EQ(lc::label_color("text"), lc::label_color("text"));
  EXPECT_TRUE(std::regex_match(lc::label_color("underlay"), std::regex("#[0-9a-f]{6}")));
  lc::RenderStyle s;
  s.fill["logo"] = "#123456";
  EXPECT_NE(lc::render_svg(sample(), s).find("#123456"), std::string::npos);
}

TEST(Svg, UnitCanvasScaling) {
  EXPECT_NE(lc::render_svg(lc::normalize(sample())).find("viewBox=\"0 0 300 400\""), std::string::npos);
  lc::Layout unit;
  unit.canvas = {1, 1, std::nullopt};
  unit.elements = {{"text", {0.1, 0.1, 0.5, 0.5}, false}};
  EXPECT_NE(lc::render_svg(unit).find("viewBox=\"0 0 1000 1000\""), std::string::npos);
}

TEST(Svg, BackgroundEmbedding) {
  const lc::SaliencyRaster bg{2, 2, {0, 1, 0.5, 0.25}};
  const auto with = lc::render_svg(sample(), {}, bg);
  EXPECT_NE(with.find("data:image/bmp;base64,Qk"), std::string::npos);
  lc::RenderStyle off;
  off.show_background = false;
  EXPECT_EQ(lc::render_svg(sample(), off, bg).find("<image"), std::string::npos);
}

TEST(Svg, EscapesLabels) {
  lc::Layout l = sample();
  l.elements[0].label = "a<b&\"c";
  const auto svg = lc::render_svg(l);
  EXPECT_EQ(svg.find("a<b"), std::string::npos);
  EXPECT_NE(svg.find("a&lt;b&amp;"), std::string::npos);
}
