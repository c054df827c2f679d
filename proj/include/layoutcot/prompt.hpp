#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "layoutcot/constraint.hpp"
#include "layoutcot/dataset.hpp"
#include "layoutcot/layout.hpp"

namespace layoutcot {

// Stage 0 is the coarse-generation prompt, 1..3 the refinement stages.
inline constexpr int kCoarseStage = 0;

struct TemplateId {
  TaskKind family = TaskKind::ContentAware;
  int stage = kCoarseStage;

  auto operator<=>(const TemplateId&) const = default;
};

/// "content_aware/coarse", "text_to_layout/2", ...
std::string to_string(const TemplateId& id);

struct PromptTemplate {
  TemplateId id;
  std::string system_text;
  std::string user_text;
  // Every {{NAME}} that occurs in either text.
  std::set<std::string> placeholders;
};

/// Names of the {{NAME}} placeholders in `text`, in order of appearance.
std::vector<std::string> placeholder_names(const std::string& text);

/// Single-pass substitution. Throws UnboundPlaceholder naming the first
/// placeholder without a binding; substituted values are not re-scanned.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& bindings);

class TemplateCatalog {
 public:
  /// The templates compiled into the library.
  static TemplateCatalog builtin();
  /// Reads `{family}/{stage}.sys.txt` and `.usr.txt` under `dir` for every
  /// family and stage. Missing files raise UnknownTemplate.
  static TemplateCatalog load(const std::filesystem::path& dir);

  void add(PromptTemplate t);
  /// Throws UnknownTemplate.
  const PromptTemplate& get(TemplateId id) const;
  const std::map<TemplateId, PromptTemplate>& templates() const { return templates_; }

 private:
  std::map<TemplateId, PromptTemplate> templates_;
};

struct PromptProvenance {
  std::string template_id;
  std::vector<std::string> exemplar_ids;
  std::string constraint_digest;

  bool operator==(const PromptProvenance&) const = default;
};

struct PromptBundle {
  std::string system;
  std::string user;
  PromptProvenance provenance;

  bool operator==(const PromptBundle&) const = default;
};

struct PromptContext {
  // Dataset label vocabulary in its canonical order; numbers the element
  // types in constraint-explicit prompts.
  std::vector<std::string> vocabulary;
  // Labels placed in the first constraint-explicit stage. Empty picks a
  // default from the vocabulary.
  std::vector<std::string> primary_labels;
};

PromptContext prompt_context(const DatasetManifest& manifest);

/// Exemplars are serialized with to_html in the given (rank) order.
/// Throws EmptyExemplars or UnboundPlaceholder.
PromptBundle build_coarse_prompt(const TemplateCatalog& catalog, const std::vector<Layout>& exemplars,
                                 const ConstraintSpec& constraint, const PromptContext& context);

/// `current` is the layout the stage starts from (the coarse result for
/// stage 1, the previous stage's output afterwards).
/// Throws UnknownTemplate, EmptyExemplars or UnboundPlaceholder.
PromptBundle build_stage_prompt(const TemplateCatalog& catalog, int stage, TaskKind family,
                                const std::vector<Layout>& exemplars, const Layout& current,
                                const ConstraintSpec& constraint, const PromptContext& context);

}  // namespace layoutcot
