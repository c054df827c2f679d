#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "layoutcot/dataset.hpp"
#include "layoutcot/layout.hpp"

namespace layoutcot {

struct CategoryCount {
  std::string label;
  std::size_t count = 0;
  bool operator==(const CategoryCount&) const = default;
};

struct SizedElement {
  std::string label;
  double width = 0.0;  // px
  double height = 0.0;
  bool operator==(const SizedElement&) const = default;
};

enum class Relation { Above, Below, LeftOf, RightOf, Larger, Smaller, Equal };

const char* to_string(Relation r);
Relation relation_from_string(const std::string& token);

/// Subject and object index into the constraint's instance list.
struct RelationTriple {
  std::size_t subject = 0;
  Relation relation = Relation::Above;
  std::size_t object = 0;
  bool operator==(const RelationTriple&) const = default;
};

struct GenTPayload {
  std::vector<CategoryCount> categories;
  bool operator==(const GenTPayload&) const = default;
};
struct GenTSPayload {
  std::vector<SizedElement> elements;
  bool operator==(const GenTSPayload&) const = default;
};
struct GenRPayload {
  std::vector<CategoryCount> categories;
  std::vector<RelationTriple> relations;
  bool operator==(const GenRPayload&) const = default;
};
/// Every element of `partial` is fixed.
struct CompletionPayload {
  Layout partial;
  bool operator==(const CompletionPayload&) const = default;
};
/// Elements of `noisy` with `locked` set are fixed; the rest may move.
struct RefinementPayload {
  Layout noisy;
  bool operator==(const RefinementPayload&) const = default;
};
struct ContentAwarePayload {
  std::vector<CategoryCount> categories;
  std::optional<std::string> saliency;
  std::optional<std::string> gradient;
  bool operator==(const ContentAwarePayload&) const = default;
};
struct TextToLayoutPayload {
  std::string description;
  // Optional structured element list used only for constraint scoring.
  std::vector<CategoryCount> categories;
  bool operator==(const TextToLayoutPayload&) const = default;
};

using ConstraintPayload = std::variant<GenTPayload, GenTSPayload, GenRPayload, CompletionPayload,
                                       RefinementPayload, ContentAwarePayload, TextToLayoutPayload>;

enum class ConstraintKind { GenT, GenTS, GenR, Completion, Refinement, ContentAware, TextToLayout };

const char* to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(const std::string& token);
/// Prompt template family serving a constraint kind.
TaskKind family_of(ConstraintKind kind);

/// User constraint of one generation request. The payload type determines
/// the kind, so the two cannot disagree.
class ConstraintSpec {
 public:
  /// Throws InvalidPayload when the payload is malformed (zero counts,
  /// relation indices out of range, non-positive sizes, empty description).
  ConstraintSpec(Canvas canvas, ConstraintPayload payload);

  ConstraintKind kind() const { return static_cast<ConstraintKind>(payload_.index()); }
  const Canvas& canvas() const { return canvas_; }
  const ConstraintPayload& payload() const { return payload_; }

  /// Category counts the payload asks for, in payload order (empty for
  /// completion/refinement).
  std::vector<CategoryCount> categories() const;
  /// Category counts expanded to one label per requested element.
  std::vector<std::string> instances() const;

  bool operator==(const ConstraintSpec&) const = default;

 private:
  Canvas canvas_;
  ConstraintPayload payload_;
};

/// Canonical text block describing the constraint to the LLM.
std::string render_constraint(const ConstraintSpec& spec);
/// SHA-256 of render_constraint(), used for provenance and replay keys.
std::string constraint_digest(const ConstraintSpec& spec);

/// JSON form: {"kind": "gen_t", ...payload fields}. `canvas` supplies the
/// canvas when the object has none.
ConstraintSpec constraint_from_json(const nlohmann::json& j, const Canvas& canvas);
nlohmann::json constraint_to_json(const ConstraintSpec& spec);

/// The constraint a dataset record implies: its explicit "constraints"
/// object when present, otherwise one derived from the task kind
/// (content-aware: canvas + its categories, text-to-layout: its text,
/// constraint-explicit: Gen-T over its categories).
ConstraintSpec constraint_for_record(const LayoutRecord& record, TaskKind task);

}  // namespace layoutcot
