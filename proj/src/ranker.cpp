#include "layoutcot/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "layoutcot/error.hpp"
#include "layoutcot/metrics.hpp"

namespace layoutcot {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kSizeTolerance = 0.10;
constexpr double kFixedTolerancePx = 1.0;

// Pixel layout on `canvas`, whatever canvas the input was drawn on.
Layout on_canvas(const Layout& layout, const Canvas& canvas) {
  Layout unit = normalize(layout);
  for (auto& e : unit.elements) {
    e.bbox = {e.bbox.left * canvas.width, e.bbox.top * canvas.height, e.bbox.width * canvas.width,
              e.bbox.height * canvas.height};
  }
  unit.canvas = canvas;
  unit.meta = {};
  return unit;
}

struct Clauses {
  std::size_t total = 0;
  std::size_t met = 0;
  void add(bool ok) {
    ++total;
    met += ok ? 1 : 0;
  }
  double fraction() const { return total == 0 ? 1.0 : static_cast<double>(met) / static_cast<double>(total); }
};

std::map<std::string, std::size_t> label_counts(const Layout& layout) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : layout.elements) ++counts[e.label];
  return counts;
}

// One clause per label in the union of requested and present labels.
void count_clauses(Clauses& c, const std::vector<CategoryCount>& wanted, const Layout& layout) {
  auto have = label_counts(layout);
  std::map<std::string, std::size_t> want;
  for (const auto& cat : wanted) want[cat.label] += cat.count;
  for (const auto& [label, n] : want) c.add(have[label] == n);
  for (const auto& [label, n] : have) {
    if (!want.contains(label) && n > 0) c.add(false);
  }
}

// k-th element of each label, in element order.
const Element* nth_of_label(const Layout& layout, const std::string& label, std::size_t k) {
  for (const auto& e : layout.elements) {
    if (e.label == label && k-- == 0) return &e;
  }
  return nullptr;
}

bool within(double got, double want, double tol) { return std::abs(got - want) <= tol; }

bool same_box(const BBox& a, const BBox& b) {
  return within(a.left, b.left, kFixedTolerancePx) && within(a.top, b.top, kFixedTolerancePx) &&
         within(a.width, b.width, kFixedTolerancePx) && within(a.height, b.height, kFixedTolerancePx);
}

// Each fixed element needs its own unchanged counterpart in the candidate.
void fixed_clauses(Clauses& c, const std::vector<Element>& fixed, const Layout& candidate) {
  std::vector<bool> used(candidate.elements.size(), false);
  for (const auto& f : fixed) {
    bool found = false;
    for (std::size_t i = 0; i < candidate.elements.size() && !found; ++i) {
      if (!used[i] && candidate.elements[i].label == f.label && same_box(candidate.elements[i].bbox, f.bbox)) {
        used[i] = found = true;
      }
    }
    c.add(found);
  }
}

bool relation_holds(Relation r, const BBox& s, const BBox& o) {
  switch (r) {
    case Relation::Above: return s.center_y() < o.center_y();
    case Relation::Below: return s.center_y() > o.center_y();
    case Relation::LeftOf: return s.center_x() < o.center_x();
    case Relation::RightOf: return s.center_x() > o.center_x();
    case Relation::Larger: return s.area() > o.area();
    case Relation::Smaller: return s.area() < o.area();
    case Relation::Equal: return std::abs(s.area() - o.area()) <= kSizeTolerance * std::max(s.area(), o.area());
  }
  return false;
}

}  // namespace

void RankerWeights::validate() const {
  if (align < 0.0 || overlap < 0.0 || constraint < 0.0) {
    throw Error(ErrorCode::ConfigError, "ranker weights must be non-negative");
  }
  if (align == 0.0 && overlap == 0.0 && constraint == 0.0) {
    throw Error(ErrorCode::ConfigError, "at least one ranker weight must be positive");
  }
}

double constraint_satisfaction(const Layout& candidate, const ConstraintSpec& constraint) {
  const Layout px = on_canvas(candidate, constraint.canvas());
  Clauses c;
  std::visit(Overloaded{
                 [&](const GenTPayload& p) { count_clauses(c, p.categories, px); },
                 [&](const GenTSPayload& p) {
                   count_clauses(c, constraint.categories(), px);
                   std::map<std::string, std::size_t> seen;
                   for (const auto& want : p.elements) {
                     const Element* e = nth_of_label(px, want.label, seen[want.label]++);
                     c.add(e && within(e->bbox.width, want.width, kSizeTolerance * want.width) &&
                           within(e->bbox.height, want.height, kSizeTolerance * want.height));
                   }
                 },
                 [&](const GenRPayload& p) {
                   count_clauses(c, p.categories, px);
                   const auto instances = constraint.instances();
                   std::vector<const Element*> bound;
                   std::map<std::string, std::size_t> seen;
                   for (const auto& label : instances) bound.push_back(nth_of_label(px, label, seen[label]++));
                   for (const auto& r : p.relations) {
                     const Element* s = bound[r.subject];
                     const Element* o = bound[r.object];
                     c.add(s && o && relation_holds(r.relation, s->bbox, o->bbox));
                   }
                 },
                 [&](const CompletionPayload& p) {
                   fixed_clauses(c, on_canvas(p.partial, constraint.canvas()).elements, px);
                 },
                 [&](const RefinementPayload& p) {
                   const Layout noisy = on_canvas(p.noisy, constraint.canvas());
                   std::vector<Element> locked;
                   for (const auto& e : noisy.elements) {
                     if (e.locked) locked.push_back(e);
                   }
                   if (!locked.empty()) {
                     fixed_clauses(c, locked, px);
                   } else {
                     std::vector<CategoryCount> cats;
                     for (const auto& [label, n] : label_counts(noisy)) cats.push_back({label, n});
                     count_clauses(c, cats, px);
                   }
                 },
                 [&](const ContentAwarePayload& p) {
                   const auto have = label_counts(px);
                   for (const auto& cat : p.categories) c.add(have.contains(cat.label));
                 },
                 [&](const TextToLayoutPayload& p) {
                   if (!p.categories.empty()) count_clauses(c, p.categories, px);
                 },
             },
             constraint.payload());
  return c.fraction();
}

Ranking rank_candidates(std::span<const Layout> candidates, const ConstraintSpec& constraint,
                        const RankerWeights& weights) {
  if (candidates.empty()) throw Error(ErrorCode::NoViableCandidate, "no candidate survived extraction");
  weights.validate();
  std::vector<std::string> exclude;
  if (constraint.kind() == ConstraintKind::ContentAware) exclude.push_back("underlay");

  Ranking r;
  for (const auto& cand : candidates) {
    CandidateScore s;
    s.alignment = cand.empty() ? 0.0 : alignment(cand);
    s.overlap = overlap(cand, exclude);
    s.satisfaction = constraint_satisfaction(cand, constraint);
    r.scores.push_back(s);
  }
  const auto normalizer = [&](auto field) {
    double lo = r.scores.front().*field, hi = lo;
    for (const auto& s : r.scores) {
      lo = std::min(lo, s.*field);
      hi = std::max(hi, s.*field);
    }
    return [lo, hi](double v) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
  };
  const auto norm_a = normalizer(&CandidateScore::alignment);
  const auto norm_o = normalizer(&CandidateScore::overlap);
  // Scores within rounding noise of the leader count as ties, so scaling all
  // weights by the same factor cannot change the winner.
  const double eps = 1e-12 * (weights.align + weights.overlap + weights.constraint);
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    auto& s = r.scores[i];
    s.score = -weights.align * norm_a(s.alignment) - weights.overlap * norm_o(s.overlap) +
              weights.constraint * s.satisfaction;
    if (s.score > r.scores[r.best].score + eps) r.best = i;
  }
  return r;
}

}  // namespace layoutcot
