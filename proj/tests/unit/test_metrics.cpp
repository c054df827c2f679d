#include <gtest/gtest.h>

#include <cmath>

#include "layoutcot/error.hpp"
#include "layoutcot/metrics.hpp"
#include "oracles.hpp"

namespace lc = layoutcot;

namespace {

lc::Layout unit(std::vector<lc::Element> elements) {
  lc::Layout l;
  l.canvas = {1, 1, std::nullopt};
  l.elements = std::move(elements);
  return l;
}

lc::Element el(const std::string& label, double x, double y, double w, double h) {
  return {label, {x, y, w, h}, false};
}

}  // namespace

TEST(Metrics, OverlapAndMaxIouHandCase) {
  const auto pair = unit({el("text", 0, 0, .5, .5), el("text", .25, .25, .5, .5)});
  EXPECT_NEAR(lc::overlap(pair), 0.125, 1e-12);
  EXPECT_NEAR(lc::max_iou(unit({pair.elements[0]}), unit({pair.elements[1]})), 1.0 / 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(lc::overlap(pair, {"text"}), 0.0);
}

TEST(Metrics, MaxIouIsLabelPreservingAndCountsUnmatched) {
  const auto gen = unit({el("logo", 0, 0, .5, .5), el("text", .5, .5, .5, .5)});
  const auto ref = unit({el("text", 0, 0, .5, .5), el("text", .5, .5, .5, .5), el("logo", 0, 0, .5, .5)});
  EXPECT_NEAR(lc::max_iou(gen, ref), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(lc::max_iou(ref, ref), 1.0, 1e-12);
}

TEST(Metrics, Alignment) {
  const auto column = unit({el("text", .1, .1, .3, .1), el("text", .1, .3, .5, .1), el("text", .1, .6, .2, .2)});
  EXPECT_DOUBLE_EQ(lc::alignment(column), 0.0);
  EXPECT_DOUBLE_EQ(lc::alignment(unit({el("text", .1, .1, .3, .1)})), 0.0);
  const auto off = unit({el("text", 0, 0, .1, .1), el("text", .35, .5, .1, .1)});
  EXPECT_NEAR(lc::alignment(off), 0.35, 1e-12);
  EXPECT_THROW(lc::alignment(unit({})), lc::Error);
}

TEST(Metrics, Underlay) {
  const auto half = unit({el("underlay", 0, 0, .5, .5), el("text", .25, 0, .5, .5)});
  EXPECT_NEAR(*lc::underlay_loose(half), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(*lc::underlay_strict(half), 0.0);
  const auto inside = unit({el("underlay", 0, 0, .5, .5), el("text", .1, .1, .2, .2)});
  EXPECT_DOUBLE_EQ(*lc::underlay_loose(inside), 1.0);
  EXPECT_DOUBLE_EQ(*lc::underlay_strict(inside), 1.0);
  EXPECT_FALSE(lc::underlay_loose(unit({el("text", 0, 0, .1, .1)})).has_value());
}

TEST(Metrics, SaliencyMetrics) {
  // Left half salient, right half free; 4 x 2 raster.
  lc::SaliencyRaster s{4, 2, {1, 1, 0, 0, 1, 1, 0, 0}};
  const auto left = unit({el("text", 0, 0, .5, 1)});
  const auto right = unit({el("logo", .5, 0, .5, 1)});
  EXPECT_DOUBLE_EQ(lc::occlusion(left, s), 1.0);
  EXPECT_DOUBLE_EQ(lc::occlusion(right, s), 0.0);
  EXPECT_DOUBLE_EQ(lc::utilization(right, s), 1.0);
  EXPECT_DOUBLE_EQ(lc::utilization(left, s), 0.0);
  EXPECT_DOUBLE_EQ(*lc::readability(left, s), 1.0);
  EXPECT_FALSE(lc::readability(right, s).has_value());
}

TEST(Metrics, SizeReasonableness) {
  const lc::AreaStats stats{{{"text", 0.25}, {"logo", 0.04}}};
  const auto exact = unit({el("text", 0, 0, .5, .5), el("logo", 0, 0, .2, .2)});
  EXPECT_NEAR(lc::size_reasonableness(std::span(&exact, 1), stats).value, 1.0, 1e-12);

  const auto big = unit({el("text", 0, 0, .5, .6)});  // r = 1.2
  const auto re = lc::size_reasonableness(std::span(&big, 1), stats);
  EXPECT_NEAR(re.value, std::exp(-(std::log(1.2) - std::log(1.1))), 1e-12);
  EXPECT_NEAR(re.labels[0].ratio, 1.2, 1e-12);

  // Inside the band every label scores 1.
  const auto near = unit({el("text", 0, 0, .5, .54)});
  EXPECT_DOUBLE_EQ(lc::size_reasonableness(std::span(&near, 1), stats).value, 1.0);

  const std::vector<lc::Layout> pop{unit({el("text", 0, 0, .5, .8)}), unit({el("logo", 0, 0, .1, .1)})};
  EXPECT_NEAR(lc::size_reasonableness(pop, stats).value, oracle::expected_re({0.25, 1.6}), 1e-12);
}

TEST(Metrics, SizeReasonablenessErrors) {
  const auto l = unit({el("underlay", 0, 0, .5, .5)});
  const auto code = [&](const lc::AreaStats& s) {
    try {
      lc::size_reasonableness(std::span(&l, 1), s);
    } catch (const lc::Error& e) {
      return e.code();
    }
    return lc::ErrorCode::IoError;
  };
  EXPECT_EQ(code({{{"text", 0.1}}}), lc::ErrorCode::MissingLabelStats);
  EXPECT_EQ(code({{{"underlay", 0.0}}}), lc::ErrorCode::ZeroTrainingArea);
}

TEST(Metrics, PixelAndUnitAgree) {
  lc::Layout px;
  px.canvas = {200, 100, std::nullopt};
  px.elements = {{"text", {0, 0, 100, 50}, false}, {"underlay", {50, 25, 100, 50}, false}};
  const auto u = lc::normalize(px);
  EXPECT_DOUBLE_EQ(lc::overlap(px), lc::overlap(u));
  EXPECT_DOUBLE_EQ(lc::alignment(px), lc::alignment(u));
  EXPECT_DOUBLE_EQ(*lc::underlay_loose(px), *lc::underlay_loose(u));
}

TEST(Metrics, PopulationReportSkipsInapplicable) {
  std::vector<lc::EvaluationItem> items(2);
  items[0].generated = unit({el("text", 0, 0, .5, .5), el("underlay", 0, 0, .6, .6)});
  items[1].generated = unit({el("text", .1, .1, .2, .2)});
  lc::EvaluationOptions opts;
  opts.task = lc::TaskKind::ContentAware;
  const auto report = lc::evaluate_population(items, opts);
  EXPECT_EQ(report.metrics.size(), lc::content_aware_metric_ids().size());
  EXPECT_FALSE(report.find("occ")->computed());
  EXPECT_FALSE(report.find("r_e")->computed());
  EXPECT_DOUBLE_EQ(*report.find("und_l")->value, 1.0);  // only item 0 applies
  EXPECT_DOUBLE_EQ(*report.find("val")->value, 1.0);
  const auto tsv = lc::format_tsv(report);
  EXPECT_EQ(tsv.substr(0, tsv.find('\t')), "Occ");
  EXPECT_NE(tsv.find("\t-"), std::string::npos);
  EXPECT_EQ(lc::metric_header("und_l"), "Und_l");
}

TEST(Metrics, UnknownMetricIsConfigError) {
  std::vector<lc::EvaluationItem> items(1);
  items[0].generated = unit({el("text", 0, 0, .5, .5)});
  lc::EvaluationOptions opts;
  opts.metrics = {"bogus"};
  EXPECT_THROW(lc::evaluate_population(items, opts), lc::Error);
}
