#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "layoutcot/layout.hpp"

namespace layoutcot {

enum class TaskKind { ContentAware, ConstraintExplicit, TextToLayout };

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

struct DatasetManifest {
  std::string name;
  TaskKind task_kind = TaskKind::ContentAware;
  std::vector<std::string> vocabulary;
  // Expected record count per split; splits not listed are unchecked.
  std::map<std::string, std::size_t> split_sizes;
  // Labels the constraint-explicit prompts move first; empty picks a default.
  std::vector<std::string> primary_labels;

  bool has_label(const std::string& label) const;
};

/// Built-in manifests: "pku", "cgl", "rico", "publaynet". Throws ConfigError
/// for any other name.
DatasetManifest builtin_manifest(const std::string& name);
DatasetManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const DatasetManifest& manifest);
/// Accepts a built-in name or a path to a manifest JSON file.
DatasetManifest resolve_manifest(const std::string& name_or_path);

struct LayoutRecord {
  std::string id;
  std::string split;
  // As ingested, in pixels.
  Layout pixel;
  // Unit-canvas form used by retrieval and metrics.
  Layout normalized;
  std::optional<std::string> saliency;
  std::optional<std::string> gradient;
  std::optional<std::string> text;
  std::optional<nlohmann::json> constraints;
};

struct IngestOptions {
  // Strict mode raises VocabularyError on unknown labels instead of
  // rejecting the record with a warning.
  bool strict = false;
};

struct CanonicalDataset {
  DatasetManifest manifest;
  std::vector<LayoutRecord> records;
  // Directory that relative raster paths are resolved against.
  std::filesystem::path base_dir;
  std::vector<std::string> warnings;

  const LayoutRecord* find(const std::string& id) const;
  std::vector<const LayoutRecord*> split(const std::string& name) const;
  std::map<std::string, std::size_t> split_counts() const;
  std::filesystem::path resolve(const std::string& path) const;
};

/// Pixel layout as {"canvas": {"w", "h"}, "elements": [{"label", "bbox", "locked"?}]}.
nlohmann::json layout_to_json(const Layout& layout);
/// Throws SchemaError on malformed input or a non-positive canvas.
Layout layout_from_json(const nlohmann::json& j);

/// Parses one JSON Lines record. Throws SchemaError on malformed input.
LayoutRecord record_from_json(const nlohmann::json& j);
nlohmann::json record_to_json(const LayoutRecord& record);

/// Reads JSON Lines records, normalizes them and checks labels against the
/// manifest vocabulary. Split counts that disagree with the manifest are
/// reported in `warnings`.
CanonicalDataset ingest(std::istream& source, const DatasetManifest& manifest,
                        const IngestOptions& options = {});
CanonicalDataset ingest_file(const std::filesystem::path& path, const DatasetManifest& manifest,
                             const IngestOptions& options = {});

void export_jsonl(const CanonicalDataset& dataset, std::ostream& out);

struct AreaStats {
  // label -> mean normalized area over the split; absent labels are omitted.
  std::map<std::string, double> mean_area;

  bool operator==(const AreaStats&) const = default;
};

AreaStats compute_area_stats(const CanonicalDataset& dataset, const std::string& split);
nlohmann::json area_stats_to_json(const AreaStats& stats);
AreaStats area_stats_from_json(const nlohmann::json& j);

}  // namespace layoutcot
