#include "layoutcot/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "layoutcot/assignment.hpp"
#include "layoutcot/error.hpp"
#include "numeric.hpp"

namespace layoutcot {

namespace {

bool has_label(const std::vector<std::string>& labels, const std::string& label) {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

void check_raster(const SaliencyRaster& r) {
  if (r.width == 0 || r.height == 0 || r.values.size() != r.width * r.height) {
    throw Error(ErrorCode::DimensionMismatch, "raster size does not match its values");
  }
}

// Pixel columns/rows whose centers fall in [lo, hi) of the unit interval.
std::pair<std::size_t, std::size_t> pixel_span(double lo, double hi, std::size_t n) {
  const double scale = static_cast<double>(n);
  const double first = std::ceil(lo * scale - 0.5);
  const double last = std::ceil(hi * scale - 0.5);
  const auto clamp = [&](double v) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, scale));
  };
  return {clamp(first), clamp(last)};
}

std::vector<char> coverage_mask(const Layout& unit, const SaliencyRaster& r,
                                const std::vector<std::string>* only_labels) {
  std::vector<char> mask(r.width * r.height, 0);
  for (const auto& e : unit.elements) {
    if (only_labels && !has_label(*only_labels, e.label)) continue;
    const auto [x0, x1] = pixel_span(e.bbox.left, e.bbox.right(), r.width);
    const auto [y0, y1] = pixel_span(e.bbox.top, e.bbox.bottom(), r.height);
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = x0; x < x1; ++x) mask[y * r.width + x] = 1;
    }
  }
  return mask;
}

}  // namespace

double alignment(const Layout& layout) {
  if (layout.empty()) throw Error(ErrorCode::EmptyLayout, "alignment of an empty layout");
  const Layout unit = normalize(layout);
  const std::size_t n = unit.elements.size();
  if (n == 1) return 0.0;

  std::vector<std::array<double, 6>> anchors(n);
  for (std::size_t i = 0; i < n; ++i) {
    const BBox& b = unit.elements[i].bbox;
    anchors[i] = {b.left, b.center_x(), b.right(), b.top, b.center_y(), b.bottom()};
  }
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::size_t a = 0; a < 6; ++a) best = std::min(best, std::fabs(anchors[i][a] - anchors[j][a]));
    }
    sum.add(best);
  }
  return sum.value() / static_cast<double>(n);
}

double overlap(const Layout& layout, const std::vector<std::string>& exclude_labels) {
  const Layout unit = normalize(layout);
  std::vector<const BBox*> boxes;
  for (const auto& e : unit.elements) {
    if (!has_label(exclude_labels, e.label)) boxes.push_back(&e.bbox);
  }
  if (boxes.size() < 2) return 0.0;
  detail::CompensatedSum inter, area;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    area.add(boxes[i]->area());
    for (std::size_t j = i + 1; j < boxes.size(); ++j) inter.add(intersection_area(*boxes[i], *boxes[j]));
  }
  if (area.value() <= 0.0) return 0.0;
  return inter.value() / area.value();
}

double max_iou(const Layout& generated, const Layout& reference) {
  if (generated.empty() || reference.empty()) {
    throw Error(ErrorCode::EmptyLayout, "max IoU needs two non-empty layouts");
  }
  const Layout g = normalize(generated);
  const Layout r = normalize(reference);
  const std::size_t rows = g.elements.size();
  const std::size_t cols = r.elements.size();
  std::vector<double> w(rows * cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (g.elements[i].label == r.elements[j].label) w[i * cols + j] = iou(g.elements[i].bbox, r.elements[j].bbox);
    }
  }
  const Assignment a = max_weight_assignment(w, rows, cols);
  return a.total / static_cast<double>(std::max(rows, cols));
}

std::optional<double> underlay_loose(const Layout& layout, const std::string& underlay_label) {
  const Layout unit = normalize(layout);
  detail::CompensatedSum sum;
  std::size_t underlays = 0;
  for (const auto& u : unit.elements) {
    if (u.label != underlay_label) continue;
    ++underlays;
    double best = 0.0;
    for (const auto& e : unit.elements) {
      if (e.label == underlay_label || !(e.bbox.area() > 0.0)) continue;
      best = std::max(best, intersection_area(e.bbox, u.bbox) / e.bbox.area());
    }
    sum.add(best);
  }
  if (underlays == 0) return std::nullopt;
  return sum.value() / static_cast<double>(underlays);
}

std::optional<double> underlay_strict(const Layout& layout, const std::string& underlay_label) {
  const Layout unit = normalize(layout);
  std::size_t underlays = 0;
  std::size_t containing = 0;
  for (const auto& u : unit.elements) {
    if (u.label != underlay_label) continue;
    ++underlays;
    const bool any = std::any_of(unit.elements.begin(), unit.elements.end(), [&](const Element& e) {
      return e.label != underlay_label && contains(u.bbox, e.bbox);
    });
    if (any) ++containing;
  }
  if (underlays == 0) return std::nullopt;
  return static_cast<double>(containing) / static_cast<double>(underlays);
}

double occlusion(const Layout& layout, const SaliencyRaster& saliency) {
  check_raster(saliency);
  const auto mask = coverage_mask(normalize(layout), saliency, nullptr);
  detail::CompensatedSum sum;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    sum.add(saliency.values[i]);
    ++covered;
  }
  return covered == 0 ? 0.0 : sum.value() / static_cast<double>(covered);
}

double utilization(const Layout& layout, const SaliencyRaster& saliency) {
  check_raster(saliency);
  const auto mask = coverage_mask(normalize(layout), saliency, nullptr);
  detail::CompensatedSum covered, total;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double free = 1.0 - saliency.values[i];
    total.add(free);
    if (mask[i]) covered.add(free);
  }
  return total.value() <= 0.0 ? 0.0 : covered.value() / total.value();
}

std::optional<double> readability(const Layout& layout, const SaliencyRaster& gradient,
                                  const std::vector<std::string>& text_labels) {
  check_raster(gradient);
  const Layout unit = normalize(layout);
  const bool any_text = std::any_of(unit.elements.begin(), unit.elements.end(),
                                    [&](const Element& e) { return has_label(text_labels, e.label); });
  if (!any_text) return std::nullopt;
  const auto mask = coverage_mask(unit, gradient, &text_labels);
  detail::CompensatedSum sum;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    sum.add(gradient.values[i]);
    ++covered;
  }
  return covered == 0 ? 0.0 : sum.value() / static_cast<double>(covered);
}

double re_tolerance() { return std::log(1.1); }

ReScore size_reasonableness(std::span<const Layout> population, const AreaStats& stats) {
  std::map<std::string, detail::CompensatedSum> sums;
  std::map<std::string, std::size_t> counts;
  for (const Layout& l : population) {
    for (const auto& e : normalize(l).elements) {
      sums[e.label].add(e.bbox.width * e.bbox.height);
      ++counts[e.label];
    }
  }
  if (sums.empty()) throw Error(ErrorCode::EmptyLayout, "population has no elements");

  const double tau = re_tolerance();
  ReScore out;
  detail::CompensatedSum squared_excess;
  for (const auto& [label, sum] : sums) {
    const auto it = stats.mean_area.find(label);
    if (it == stats.mean_area.end()) {
      throw Error(ErrorCode::MissingLabelStats, "no training area for label '" + label + "'");
    }
    if (!(it->second > 0.0)) {
      throw Error(ErrorCode::ZeroTrainingArea, "training area of label '" + label + "' is zero");
    }
    LabelReScore s;
    s.label = label;
    s.ratio = (sum.value() / static_cast<double>(counts[label])) / it->second;
    s.deviation = std::fabs(std::log(s.ratio));
    const double excess = std::max(0.0, s.deviation - tau);
    s.score = std::exp(-excess);
    squared_excess.add(excess * excess);
    out.labels.push_back(s);
  }
  out.value = std::exp(-std::sqrt(squared_excess.value() / static_cast<double>(out.labels.size())));
  return out;
}

const MetricEntry* MetricReport::find(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const std::vector<std::string>& content_aware_metric_ids() {
  static const std::vector<std::string> ids = {"occ", "rea", "uti", "align", "und_l",
                                               "und_s", "ove", "val", "r_e"};
  return ids;
}

const std::vector<std::string>& layout_metric_ids() {
  static const std::vector<std::string> ids = {"miou", "align", "ove"};
  return ids;
}

std::string metric_header(const std::string& id) {
  static const std::map<std::string, std::string> headers = {
      {"occ", "Occ"},     {"rea", "Rea"},     {"uti", "Uti"}, {"align", "Align"},
      {"und_l", "Und_l"}, {"und_s", "Und_s"}, {"ove", "Ove"}, {"val", "Val"},
      {"r_e", "R_e"},     {"miou", "mIoU"}};
  const auto it = headers.find(id);
  return it == headers.end() ? id : it->second;
}

namespace {

struct Mean {
  detail::CompensatedSum sum;
  std::size_t n = 0;
  void add(double v) {
    sum.add(v);
    ++n;
  }
  MetricEntry entry(const std::string& name, const std::string& reason) const {
    if (n == 0) return {name, std::nullopt, reason};
    return {name, sum.value() / static_cast<double>(n), {}};
  }
};

MetricEntry compute_metric(const std::string& id, std::span<const EvaluationItem> items,
                           const EvaluationOptions& options) {
  const std::vector<std::string> overlap_exclude =
      options.task == TaskKind::ContentAware ? std::vector<std::string>{options.underlay_label}
                                             : std::vector<std::string>{};
  Mean mean;
  if (id == "align") {
    for (const auto& it : items) {
      if (!it.generated.empty()) mean.add(alignment(it.generated));
    }
    return mean.entry(id, "no_elements");
  }
  if (id == "ove") {
    for (const auto& it : items) mean.add(overlap(it.generated, overlap_exclude));
    return mean.entry(id, "empty_population");
  }
  if (id == "miou") {
    for (const auto& it : items) {
      if (!it.reference || it.reference->empty()) continue;
      mean.add(it.generated.empty() ? 0.0 : max_iou(it.generated, *it.reference));
    }
    return mean.entry(id, "no_reference");
  }
  if (id == "und_l" || id == "und_s") {
    for (const auto& it : items) {
      const auto v = id == "und_l" ? underlay_loose(it.generated, options.underlay_label)
                                   : underlay_strict(it.generated, options.underlay_label);
      if (v) mean.add(*v);
    }
    return mean.entry(id, "no_underlay");
  }
  if (id == "val") {
    std::size_t valid = 0, total = 0;
    for (const auto& it : items) {
      const auto report = validate_layout(it.generated, options.min_area_ratio);
      total += report.element_valid.size();
      valid += static_cast<std::size_t>(std::count(report.element_valid.begin(), report.element_valid.end(), true));
    }
    if (total == 0) return {id, std::nullopt, "no_elements"};
    return {id, static_cast<double>(valid) / static_cast<double>(total), {}};
  }
  if (id == "occ" || id == "uti") {
    for (const auto& it : items) {
      if (!it.saliency) continue;
      mean.add(id == "occ" ? occlusion(it.generated, *it.saliency) : utilization(it.generated, *it.saliency));
    }
    return mean.entry(id, "no_saliency");
  }
  if (id == "rea") {
    bool any_raster = false;
    for (const auto& it : items) {
      if (!it.gradient) continue;
      any_raster = true;
      if (const auto v = readability(it.generated, *it.gradient, options.text_labels)) mean.add(*v);
    }
    return mean.entry(id, any_raster ? "no_text" : "no_gradient");
  }
  if (id == "r_e") {
    if (!options.area_stats) return {id, std::nullopt, "no_area_stats"};
    std::vector<Layout> population;
    for (const auto& it : items) population.push_back(it.generated);
    try {
      return {id, size_reasonableness(population, *options.area_stats).value, {}};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyLayout) return {id, std::nullopt, "no_elements"};
      throw;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown metric '" + id + "'");
}

}  // namespace

MetricReport evaluate_population(std::span<const EvaluationItem> items, const EvaluationOptions& options) {
  MetricReport report;
  report.population_size = items.size();
  const std::vector<std::string>& ids =
      !options.metrics.empty() ? options.metrics
      : options.task == TaskKind::ContentAware ? content_aware_metric_ids()
                                               : layout_metric_ids();
  for (const auto& id : ids) report.metrics.push_back(compute_metric(id, items, options));
  return report;
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

int pretty_decimals(const std::string& id) { return id == "align" || id == "ove" ? 4 : 3; }

}  // namespace

std::string format_tsv(const MetricReport& report) {
  std::string header, values;
  for (std::size_t i = 0; i < report.metrics.size(); ++i) {
    const auto& m = report.metrics[i];
    if (i) {
      header += '\t';
      values += '\t';
    }
    header += metric_header(m.name);
    values += m.value ? fixed(*m.value, 6) : "-";
  }
  return header + '\n' + values + '\n';
}

std::string format_pretty(const MetricReport& report) {
  std::vector<std::string> heads, cells;
  for (const auto& m : report.metrics) {
    heads.push_back(metric_header(m.name));
    cells.push_back(m.value ? fixed(*m.value, pretty_decimals(m.name)) : "-");
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const std::size_t width = std::max(heads[i].size(), cells[i].size()) + 2;
    os << heads[i] << std::string(width - heads[i].size(), ' ');
  }
  os << '\n';
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const std::size_t width = std::max(heads[i].size(), cells[i].size()) + 2;
    os << cells[i] << std::string(width - cells[i].size(), ' ');
  }
  os << "\n(n = " << report.population_size << ")\n";
  return os.str();
}

}  // namespace layoutcot
