#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "layoutcot/constraint.hpp"
#include "layoutcot/layout.hpp"

namespace layoutcot {

struct RankerWeights {
  double align = 1.0;
  double overlap = 1.0;
  double constraint = 1.0;

  /// Throws ConfigError for a negative weight or when all are zero.
  void validate() const;
};

/// Fraction of the constraint's clauses the candidate satisfies, in [0, 1].
/// The candidate is compared on the constraint's canvas; sizes match within
/// 10% and fixed elements within 1 px. A constraint without clauses scores 1.
double constraint_satisfaction(const Layout& candidate, const ConstraintSpec& constraint);

struct CandidateScore {
  double alignment = 0.0;
  double overlap = 0.0;
  double satisfaction = 0.0;
  double score = 0.0;
};

struct Ranking {
  std::size_t best = 0;
  std::vector<CandidateScore> scores;
};

/// score = -w_a * norm(alignment) - w_o * norm(overlap) + w_c * satisfaction,
/// norm being min-max over the candidate set (0 for a constant column).
/// Content-aware overlap ignores underlay elements. Ties go to the lowest
/// index. Throws NoViableCandidate for an empty set.
Ranking rank_candidates(std::span<const Layout> candidates, const ConstraintSpec& constraint,
                        const RankerWeights& weights = {});

}  // namespace layoutcot
