#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layoutcot/dataset.hpp"
#include "layoutcot/layout.hpp"
#include "layoutcot/raster.hpp"

namespace layoutcot {

// Every metric normalizes its input first, so pixel and unit-canvas layouts
// give the same values.

/// Mean over elements of the smallest gap between one of its six anchors
/// (left, x-center, right, top, y-center, bottom) and the same anchor of any
/// other element. Single-element layouts score 0. Throws EmptyLayout.
double alignment(const Layout& layout);

/// Summed pairwise intersection area over summed element area, ignoring
/// elements whose label is in `exclude_labels`.
double overlap(const Layout& layout, const std::vector<std::string>& exclude_labels = {});

/// Mean IoU under the best label-preserving one-to-one matching; unmatched
/// elements count as 0 and the mean runs over the larger element count.
/// Throws EmptyLayout.
double max_iou(const Layout& generated, const Layout& reference);

/// nullopt when the layout has no underlay.
std::optional<double> underlay_loose(const Layout& layout, const std::string& underlay_label = "underlay");
std::optional<double> underlay_strict(const Layout& layout, const std::string& underlay_label = "underlay");

/// Mean saliency over pixels whose center lies in at least one element.
double occlusion(const Layout& layout, const SaliencyRaster& saliency);
/// Share of the non-salient mass (1 - saliency) covered by elements.
double utilization(const Layout& layout, const SaliencyRaster& saliency);
/// Mean gradient intensity under text elements; nullopt when there are none.
std::optional<double> readability(const Layout& layout, const SaliencyRaster& gradient,
                                  const std::vector<std::string>& text_labels = {"text"});

struct LabelReScore {
  std::string label;
  double ratio = 0.0;      // r_i
  double deviation = 0.0;  // d_i = |ln r_i|
  double score = 0.0;      // score_i
};

struct ReScore {
  std::vector<LabelReScore> labels;
  double value = 1.0;  // R_e
};

/// Width of the log-space tolerance band, ln(1.1).
double re_tolerance();

/// Element-size reasonableness of a population against training means.
/// Throws MissingLabelStats, ZeroTrainingArea, or EmptyLayout when the
/// population holds no elements.
ReScore size_reasonableness(std::span<const Layout> population, const AreaStats& stats);

struct MetricEntry {
  std::string name;
  std::optional<double> value;
  std::string skip_reason;

  bool computed() const { return value.has_value(); }
};

struct MetricReport {
  std::vector<MetricEntry> metrics;
  std::size_t population_size = 0;

  const MetricEntry* find(const std::string& name) const;
};

/// Metric ids in table order.
const std::vector<std::string>& content_aware_metric_ids();
const std::vector<std::string>& layout_metric_ids();
/// Column header for a metric id ("und_l" -> "Und_l", ...).
std::string metric_header(const std::string& id);

struct EvaluationItem {
  Layout generated;
  std::optional<Layout> reference;
  std::optional<SaliencyRaster> saliency;
  std::optional<SaliencyRaster> gradient;
};

struct EvaluationOptions {
  TaskKind task = TaskKind::ContentAware;
  // Subset and order of metric ids; empty picks the task's default table.
  std::vector<std::string> metrics;
  std::optional<AreaStats> area_stats;
  std::string underlay_label = "underlay";
  std::vector<std::string> text_labels = {"text"};
  double min_area_ratio = kDefaultMinAreaRatio;
};

/// Population metrics. Per-layout metrics are averaged over the layouts they
/// apply to; metrics with no applicable layout are reported as skipped.
MetricReport evaluate_population(std::span<const EvaluationItem> items, const EvaluationOptions& options);

/// Two lines: tab-separated headers, then values (6 decimals, "-" if skipped).
std::string format_tsv(const MetricReport& report);
/// Aligned columns for terminals.
std::string format_pretty(const MetricReport& report);

}  // namespace layoutcot
