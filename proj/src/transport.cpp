#include "layoutcot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "layoutcot/error.hpp"
#include "min_cost_flow.hpp"

namespace layoutcot {

namespace {

// Costs in [0, 1] are quantized to integers at this scale for the exact
// solver. The optimum of the quantized problem is within 2^-40 of the real
// optimum; the reported cost is always recomputed from the real matrix.
constexpr double kCostScale = 1099511627776.0;  // 2^40

TransportPlan solve_exact(std::span<const double> cost, std::size_t rows, std::size_t cols) {
  using Value = detail::MinCostFlow::Value;
  const Value units = static_cast<Value>(std::lcm(rows, cols));
  const Value row_supply = units / static_cast<Value>(rows);
  const Value col_demand = units / static_cast<Value>(cols);

  const int source = 0;
  const int sink = static_cast<int>(rows + cols) + 1;
  detail::MinCostFlow graph(static_cast<int>(rows + cols) + 2);
  for (std::size_t i = 0; i < rows; ++i) {
    graph.add_edge(source, static_cast<int>(1 + i), row_supply, 0);
  }
  std::vector<int> handles(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double c = std::max(0.0, cost[i * cols + j]);
      handles[i * cols + j] =
          graph.add_edge(static_cast<int>(1 + i), static_cast<int>(1 + rows + j),
                         std::min(row_supply, col_demand), std::llround(c * kCostScale));
    }
  }
  for (std::size_t j = 0; j < cols; ++j) {
    graph.add_edge(static_cast<int>(1 + rows + j), sink, col_demand, 0);
  }
  graph.solve(source, sink, units);

  TransportPlan plan;
  plan.rows = rows;
  plan.cols = cols;
  plan.mass.resize(rows * cols);
  const double denom = static_cast<double>(units);
  double total = 0.0;
  for (std::size_t k = 0; k < rows * cols; ++k) {
    const Value f = graph.flow(handles[k]);
    plan.mass[k] = static_cast<double>(f) / denom;
    if (f != 0) total += plan.mass[k] * cost[k];
  }
  plan.cost = total;
  return plan;
}

double log_sum_exp(const std::vector<double>& v) {
  const double hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

TransportPlan solve_sinkhorn(std::span<const double> cost, std::size_t rows, std::size_t cols,
                             const TransportOptions& options) {
  const double eps = options.sinkhorn_epsilon;
  if (!(eps > 0.0)) throw Error(ErrorCode::ConfigError, "sinkhorn epsilon must be positive");
  const double log_a = -std::log(static_cast<double>(rows));
  const double log_b = -std::log(static_cast<double>(cols));
  std::vector<double> f(rows, 0.0), g(cols, 0.0);
  std::vector<double> scratch_row(cols), scratch_col(rows);

  const auto row_error = [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) s += std::exp((f[i] + g[j] - cost[i * cols + j]) / eps);
      worst = std::max(worst, std::fabs(s - 1.0 / static_cast<double>(rows)));
    }
    return worst;
  };

  for (std::size_t it = 0; it < options.sinkhorn_max_iterations; ++it) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) scratch_row[j] = (g[j] - cost[i * cols + j]) / eps;
      f[i] = eps * (log_a - log_sum_exp(scratch_row));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = 0; i < rows; ++i) scratch_col[i] = (f[i] - cost[i * cols + j]) / eps;
      g[j] = eps * (log_b - log_sum_exp(scratch_col));
    }
    if (it % 10 == 9 && row_error() < options.sinkhorn_tolerance) break;
  }

  TransportPlan plan;
  plan.rows = rows;
  plan.cols = cols;
  plan.mass.resize(rows * cols);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t k = i * cols + j;
      plan.mass[k] = std::exp((f[i] + g[j] - cost[k]) / eps);
      total += plan.mass[k] * cost[k];
    }
  }
  plan.cost = total;
  return plan;
}

}  // namespace

void CostWeights::validate() const {
  if (geometric < 0.0 || label < 0.0 || std::fabs(geometric + label - 1.0) > 1e-12) {
    throw Error(ErrorCode::ConfigError, "cost weights must be non-negative and sum to 1");
  }
}

double element_cost(const FeatureElement& a, const FeatureElement& b, const CostWeights& weights) {
  const double geo =
      (std::fabs(a.cx - b.cx) + std::fabs(a.cy - b.cy) + std::fabs(a.w - b.w) + std::fabs(a.h - b.h)) /
      4.0;
  return weights.geometric * geo + weights.label * (a.label != b.label ? 1.0 : 0.0);
}

double element_cost(const Element& a, const Element& b, const CostWeights& weights) {
  const FeatureElement fa{0, a.bbox.center_x(), a.bbox.center_y(), a.bbox.width, a.bbox.height};
  FeatureElement fb{0, b.bbox.center_x(), b.bbox.center_y(), b.bbox.width, b.bbox.height};
  if (a.label != b.label) fb.label = 1;
  return element_cost(fa, fb, weights);
}

TransportPlan solve_uniform_transport(std::span<const double> cost, std::size_t rows,
                                      std::size_t cols, const TransportOptions& options) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::EmptyLayout, "transport between empty element sets is undefined");
  }
  if (cost.size() != rows * cols) {
    throw Error(ErrorCode::DimensionMismatch, "cost matrix size does not match rows x cols");
  }
  return options.solver == TransportSolver::Exact ? solve_exact(cost, rows, cols)
                                                  : solve_sinkhorn(cost, rows, cols, options);
}

TransportPlan transport_distance(std::span<const FeatureElement> a,
                                 std::span<const FeatureElement> b, const CostWeights& weights,
                                 const TransportOptions& options) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptyLayout, "transport distance needs non-empty layouts");
  }
  std::vector<double> cost(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) cost[i * b.size() + j] = element_cost(a[i], b[j], weights);
  }
  return solve_uniform_transport(cost, a.size(), b.size(), options);
}

std::vector<FeatureElement> to_features(const Layout& layout,
                                        const std::vector<std::string>& vocabulary) {
  const Layout unit = normalize(layout);
  std::vector<std::string> extra;
  std::vector<FeatureElement> out;
  out.reserve(unit.elements.size());
  for (const auto& e : unit.elements) {
    int id;
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), e.label);
    if (it != vocabulary.end()) {
      id = static_cast<int>(it - vocabulary.begin());
    } else {
      auto xt = std::find(extra.begin(), extra.end(), e.label);
      if (xt == extra.end()) xt = extra.insert(extra.end(), e.label);
      id = static_cast<int>(vocabulary.size() + static_cast<std::size_t>(xt - extra.begin()));
    }
    out.push_back({id, e.bbox.center_x(), e.bbox.center_y(), e.bbox.width, e.bbox.height});
  }
  return out;
}

TransportPlan transport_distance(const Layout& a, const Layout& b, const CostWeights& weights,
                                 const TransportOptions& options) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptyLayout, "transport distance needs non-empty layouts");
  }
  std::vector<std::string> labels;
  for (const Layout* l : {&a, &b}) {
    for (const auto& e : l->elements) {
      if (std::find(labels.begin(), labels.end(), e.label) == labels.end()) labels.push_back(e.label);
    }
  }
  const auto fa = to_features(a, labels);
  const auto fb = to_features(b, labels);
  return transport_distance(fa, fb, weights, options);
}

double ltsim_score(const Layout& a, const Layout& b, const CostWeights& weights, double scale,
                   const TransportOptions& options) {
  if (!(scale > 0.0)) throw Error(ErrorCode::ConfigError, "similarity scale must be positive");
  return std::exp(-scale * transport_distance(a, b, weights, options).cost);
}

}  // namespace layoutcot
