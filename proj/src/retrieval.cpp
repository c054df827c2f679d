#include "layoutcot/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "layoutcot/error.hpp"

namespace layoutcot {

using nlohmann::json;

const IndexEntry* RetrievalIndex::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Layout RetrievalIndex::to_layout(const IndexEntry& entry) const {
  Layout l;
  l.id = entry.id;
  l.canvas.width = entry.canvas_width;
  l.canvas.height = entry.canvas_height;
  for (const auto& f : entry.elements) {
    Element e;
    e.label = static_cast<std::size_t>(f.label) < vocabulary.size() ? vocabulary[f.label] : "unknown";
    e.bbox = BBox{(f.cx - f.w / 2.0) * entry.canvas_width, (f.cy - f.h / 2.0) * entry.canvas_height,
                  f.w * entry.canvas_width, f.h * entry.canvas_height};
    l.elements.push_back(std::move(e));
  }
  return l;
}

RetrievalIndex build_index(const CanonicalDataset& dataset, const std::string& split,
                           const CostWeights& weights, std::vector<std::string>* warnings) {
  weights.validate();
  RetrievalIndex index;
  index.vocabulary = dataset.manifest.vocabulary;
  index.weights = weights;
  for (const LayoutRecord* r : dataset.split(split)) {
    if (r->normalized.empty()) {
      if (warnings) warnings->push_back("layout '" + r->id + "' has no elements; not indexed");
      continue;
    }
    IndexEntry entry;
    entry.id = r->id;
    entry.canvas_width = r->pixel.canvas.width;
    entry.canvas_height = r->pixel.canvas.height;
    entry.elements = to_features(r->normalized, index.vocabulary);
    index.entries.push_back(std::move(entry));
  }
  if (index.entries.empty()) {
    throw Error(ErrorCode::EmptySplit, "split '" + split + "' has no indexable layouts");
  }
  return index;
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
  json entries = json::array();
  for (const auto& e : index.entries) {
    json elements = json::array();
    for (const auto& f : e.elements) elements.push_back({f.label, f.cx, f.cy, f.w, f.h});
    entries.push_back({{"id", e.id}, {"canvas", {e.canvas_width, e.canvas_height}}, {"elements", elements}});
  }
  const json j{{"version", index.version},
               {"vocabulary", index.vocabulary},
               {"weights", {{"geometric", index.weights.geometric}, {"label", index.weights.label}}},
               {"entries", std::move(entries)}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write index " + path.string());
  out << j.dump() << '\n';
}

RetrievalIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open index " + path.string());
  RetrievalIndex index;
  try {
    json j;
    in >> j;
    index.version = j.at("version").get<std::string>();
    if (index.version != kIndexVersion) {
      throw Error(ErrorCode::VersionMismatch,
                  "index version '" + index.version + "', expected '" + kIndexVersion + "'");
    }
    index.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    index.weights.geometric = j.at("weights").at("geometric").get<double>();
    index.weights.label = j.at("weights").at("label").get<double>();
    std::set<std::string> ids;
    for (const json& e : j.at("entries")) {
      IndexEntry entry;
      entry.id = e.at("id").get<std::string>();
      if (!ids.insert(entry.id).second) {
        throw Error(ErrorCode::SchemaError, "duplicate index entry '" + entry.id + "'");
      }
      entry.canvas_width = e.at("canvas").at(0).get<double>();
      entry.canvas_height = e.at("canvas").at(1).get<double>();
      for (const json& f : e.at("elements")) {
        entry.elements.push_back({f.at(0).get<int>(), f.at(1).get<double>(), f.at(2).get<double>(),
                                  f.at(3).get<double>(), f.at(4).get<double>()});
      }
      if (entry.elements.empty()) {
        throw Error(ErrorCode::SchemaError, "index entry '" + entry.id + "' has no elements");
      }
      index.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, "malformed index " + path.string() + ": " + e.what());
  }
  return index;
}

namespace {

bool ranks_before(const RetrievalHit& a, const RetrievalHit& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.id < b.id;
}

}  // namespace

std::vector<RetrievalHit> topk_retrieve(const Layout& query, const RetrievalIndex& index,
                                        const RetrievalOptions& options) {
  if (index.entries.empty()) throw Error(ErrorCode::EmptyIndex, "retrieval index is empty");
  if (query.empty()) throw Error(ErrorCode::EmptyLayout, "retrieval query has no elements");
  if (options.k == 0) throw Error(ErrorCode::ConfigError, "k must be at least 1");
  if (!(options.scale > 0.0)) throw Error(ErrorCode::ConfigError, "similarity scale must be positive");

  const std::vector<FeatureElement> q = to_features(query, index.vocabulary);
  const std::string& self = options.self_id.empty() ? query.id : options.self_id;
  const std::size_t n = index.entries.size();
  std::vector<double> scores(n);

  const auto scan = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double d = transport_distance(q, index.entries[i].elements, index.weights, options.transport).cost;
      scores[i] = std::exp(-options.scale * d);
    }
  };

  std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n / 256));
  if (threads == 1) {
    scan(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(scan, begin, end);
    }
  }

  std::vector<RetrievalHit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (options.exclude_self && !self.empty() && index.entries[i].id == self) continue;
    hits.push_back({index.entries[i].id, scores[i]});
  }
  const std::size_t k = std::min(options.k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), ranks_before);
  hits.resize(k);
  return hits;
}

Layout pseudo_query(const Canvas& canvas, const std::vector<std::string>& categories,
                    const AreaStats& stats, double default_area) {
  Layout l;
  l.canvas.width = 1.0;
  l.canvas.height = 1.0;
  if (canvas.width > 0.0 && canvas.height > 0.0 && !(canvas.width == 1.0 && canvas.height == 1.0)) {
    l.meta.original_width = canvas.width;
    l.meta.original_height = canvas.height;
  }
  for (const auto& label : categories) {
    const auto it = stats.mean_area.find(label);
    const double area = it != stats.mean_area.end() && it->second > 0.0 ? it->second : default_area;
    const double side = std::min(1.0, std::sqrt(area));
    l.elements.push_back({label, BBox{0.5 - side / 2.0, 0.5 - side / 2.0, side, side}, false});
  }
  return l;
}

}  // namespace layoutcot
