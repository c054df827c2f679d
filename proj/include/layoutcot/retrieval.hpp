#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "layoutcot/dataset.hpp"
#include "layoutcot/layout.hpp"
#include "layoutcot/transport.hpp"

namespace layoutcot {

inline constexpr const char* kIndexVersion = "layoutcot-index/1";

struct IndexEntry {
  std::string id;
  // Pixel size of the source canvas, kept so exemplars can be re-serialized.
  double canvas_width = 0.0;
  double canvas_height = 0.0;
  std::vector<FeatureElement> elements;

  bool operator==(const IndexEntry&) const = default;
};

/// Flat retrieval database over normalized layouts. Immutable once built.
struct RetrievalIndex {
  std::string version = kIndexVersion;
  std::vector<std::string> vocabulary;
  CostWeights weights;
  std::vector<IndexEntry> entries;

  const IndexEntry* find(const std::string& id) const;
  /// Rebuilds the pixel-space layout an entry was made from (up to
  /// floating-point rounding).
  Layout to_layout(const IndexEntry& entry) const;

  bool operator==(const RetrievalIndex&) const = default;
};

/// Indexes every layout of `split` that has elements; empty layouts are
/// skipped with a warning. Throws EmptySplit when nothing is left.
RetrievalIndex build_index(const CanonicalDataset& dataset, const std::string& split,
                           const CostWeights& weights = {},
                           std::vector<std::string>* warnings = nullptr);

void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
/// Throws VersionMismatch when the file was written by another format version.
RetrievalIndex load_index(const std::filesystem::path& path);

struct RetrievalHit {
  std::string id;
  double similarity = 0.0;

  bool operator==(const RetrievalHit&) const = default;
};

struct RetrievalOptions {
  std::size_t k = 10;
  double scale = 1.0;
  bool exclude_self = false;
  // Id treated as "self" when exclude_self is set; defaults to query.id.
  std::string self_id;
  TransportOptions transport;
  // Worker threads for the scan; 0 picks hardware concurrency.
  std::size_t threads = 0;
};

/// The k entries with the highest LTSim to `query`, similarity descending,
/// ties by ascending id. Uses the index's cost weights.
/// Throws EmptyIndex or EmptyLayout.
std::vector<RetrievalHit> topk_retrieve(const Layout& query, const RetrievalIndex& index,
                                        const RetrievalOptions& options = {});

/// Stand-in query for layouts without elements: one element per requested
/// category, centered on the canvas, with the label's training mean area
/// (square in normalized units). Labels without stats get `default_area`.
Layout pseudo_query(const Canvas& canvas, const std::vector<std::string>& categories,
                    const AreaStats& stats, double default_area = 0.05);

}  // namespace layoutcot
