#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "layoutcot/constraint.hpp"
#include "layoutcot/dataset.hpp"
#include "layoutcot/gateway.hpp"
#include "layoutcot/metrics.hpp"
#include "layoutcot/prompt.hpp"
#include "layoutcot/ranker.hpp"
#include "layoutcot/retrieval.hpp"

namespace layoutcot {

struct GenerationSettings {
  std::size_t k_coarse = 10;
  std::size_t k_cot = 4;
  std::size_t n = 10;
  int stages = 3;
  double coarse_temperature = 0.7;
  double cot_temperature = 0.0;
  double ltsim_scale = 1.0;
};

struct AblationSettings {
  // Random exemplars instead of retrieval.
  bool no_rag = false;
  // Stop after the coarse step.
  bool no_cot = false;
  std::uint64_t seed = 0;
};

/// Everything one item's generation needs. Members are borrowed.
struct PipelineContext {
  const RetrievalIndex* index = nullptr;
  const TemplateCatalog* catalog = nullptr;
  const Gateway* gateway = nullptr;
  PromptContext prompt;
  GenerationSettings generation;
  RankerWeights ranker;
  AblationSettings ablation;
  // Used to size pseudo-queries for items without a layout.
  AreaStats area_stats;
};

struct CoarseCandidate {
  std::size_t index = 0;
  std::string raw;
  std::optional<Layout> layout;
  std::string failure;
  std::optional<CandidateScore> score;
};

struct StageRecord {
  int stage = 0;
  PromptProvenance provenance;
  // One response per attempt (at most two).
  std::vector<std::string> responses;
  std::optional<Layout> parsed;
  std::string failure;
  bool fallback = false;
};

struct RefinementTrace {
  std::string run_id;
  std::string item_id;
  nlohmann::json constraint;
  std::uint64_t seed = 0;
  bool random_exemplars = false;
  std::vector<std::string> coarse_exemplar_ids;
  std::vector<std::string> cot_exemplar_ids;
  PromptProvenance coarse_provenance;
  std::vector<CoarseCandidate> candidates;
  std::optional<std::size_t> chosen;
  std::optional<Layout> coarse;
  std::vector<StageRecord> stages;
  std::optional<Layout> final_layout;
  // Set when the item failed; the other fields hold what was reached.
  std::string error;
};

nlohmann::json trace_to_json(const RefinementTrace& trace);

/// Layout used to query the index: `layout` when it has elements, otherwise
/// a pseudo-layout of the constraint's categories (every vocabulary label
/// once when the constraint names none).
Layout retrieval_query(const Layout& layout, const ConstraintSpec& constraint, const PipelineContext& ctx);

/// Exemplars for an item, best first: top-k retrieval, or a seeded random
/// draw from the index under no_rag.
std::vector<Layout> select_exemplars(const Layout& query, const std::string& item_id, std::size_t k,
                                     const PipelineContext& ctx);

/// Fills the coarse part of `trace` and returns the chosen layout. Throws
/// NoViableCandidate when no candidate parses after the retry round.
Layout generate_coarse(const std::vector<Layout>& exemplars, const ConstraintSpec& constraint,
                       const PipelineContext& ctx, RefinementTrace& trace);

/// Runs the refinement stages from `coarse`, appending them to `trace`, and
/// returns the final layout. Extraction failures are retried once and then
/// absorbed by falling back to the previous layout.
Layout refine_cot(const Layout& coarse, const std::vector<Layout>& exemplars, const ConstraintSpec& constraint,
                  const PipelineContext& ctx, RefinementTrace& trace);

/// Whole pipeline for one dataset record. Domain errors end up in
/// trace.error instead of propagating.
RefinementTrace run_item(const LayoutRecord& record, TaskKind task, const PipelineContext& ctx,
                         const std::string& run_id);

struct RunOverrides {
  std::optional<BackendMode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<bool> no_rag;
  std::optional<bool> no_cot;
  std::optional<int> stages;
  std::optional<std::size_t> limit;
  std::optional<std::filesystem::path> output_dir;
};

struct RunConfig {
  std::filesystem::path config_dir;
  TaskKind task = TaskKind::ContentAware;
  std::filesystem::path records;
  std::string manifest = "pku";
  std::string query_split = "test";
  std::string database_split = "train";
  std::optional<std::filesystem::path> index;
  std::optional<std::filesystem::path> area_stats;
  std::optional<std::filesystem::path> templates;
  BackendConfig backend;
  CostWeights weights;
  GenerationSettings generation;
  RankerWeights ranker;
  AblationSettings ablation;
  std::vector<std::string> metrics;
  std::filesystem::path output_dir = "run";
  std::optional<std::size_t> limit;
  std::size_t retrieval_threads = 0;
};

/// Parses a run config. Relative paths resolve against `config_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& config_dir);
RunConfig load_run_config(const std::filesystem::path& path);
void apply_overrides(RunConfig& config, const RunOverrides& overrides);

struct RunSummary {
  std::filesystem::path output_dir;
  std::size_t items = 0;
  std::size_t failures = 0;
  MetricReport report;
};

/// Writes traces/{id}.json, generated.jsonl, metrics.tsv and run.log under
/// the output directory. Only run.log carries timestamps.
RunSummary run_task(const RunConfig& config, std::shared_ptr<ChatBackend> backend = nullptr);

}  // namespace layoutcot
