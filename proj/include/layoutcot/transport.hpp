#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "layoutcot/layout.hpp"

namespace layoutcot {

/// Mixing weights of the element cost. Must be non-negative and sum to one.
struct CostWeights {
  double geometric = 0.5;
  double label = 0.5;

  /// Throws ConfigError when the weights break the invariant.
  void validate() const;
  bool operator==(const CostWeights&) const = default;
};

/// One element reduced to what the cost function reads: an integer label
/// and the normalized center/size.
struct FeatureElement {
  int label = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool operator==(const FeatureElement&) const = default;
};

/// mu = geometric * (|dcx| + |dcy| + |dw| + |dh|) / 4 + label * [labels differ]
double element_cost(const FeatureElement& a, const FeatureElement& b, const CostWeights& weights);
/// Same cost on layout elements; both must already be normalized.
double element_cost(const Element& a, const Element& b, const CostWeights& weights);

/// Fractional assignment between two element sets and its cost.
struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;  // row-major rows x cols
  double cost = 0.0;

  double at(std::size_t i, std::size_t j) const { return mass[i * cols + j]; }
};

enum class TransportSolver {
  // Min-cost flow on the lcm-scaled integer problem.
  Exact,
  // Entropic approximation; marginals and cost are only approximate.
  Sinkhorn,
};

struct TransportOptions {
  TransportSolver solver = TransportSolver::Exact;
  double sinkhorn_epsilon = 0.01;
  std::size_t sinkhorn_max_iterations = 20000;
  double sinkhorn_tolerance = 1e-10;
};

/// Balanced transport with uniform marginals (1/rows, 1/cols) over a
/// row-major cost matrix. Throws EmptyLayout when either side is empty.
TransportPlan solve_uniform_transport(std::span<const double> cost, std::size_t rows,
                                      std::size_t cols, const TransportOptions& options = {});

TransportPlan transport_distance(std::span<const FeatureElement> a,
                                 std::span<const FeatureElement> b, const CostWeights& weights,
                                 const TransportOptions& options = {});

/// Normalizes both layouts, then solves the transport between their
/// elements. Throws EmptyLayout if either has no elements.
TransportPlan transport_distance(const Layout& a, const Layout& b,
                                 const CostWeights& weights = {},
                                 const TransportOptions& options = {});

/// exp(-scale * D(a, b)).
double ltsim_score(const Layout& a, const Layout& b, const CostWeights& weights = {},
                   double scale = 1.0, const TransportOptions& options = {});

/// Converts a normalized copy of `layout` to features. Label ids are indices
/// into `vocabulary`; labels outside it get ids past the end, one per
/// distinct string in order of first appearance.
std::vector<FeatureElement> to_features(const Layout& layout,
                                        const std::vector<std::string>& vocabulary);

}  // namespace layoutcot
