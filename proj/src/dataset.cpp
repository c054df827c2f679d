#include "layoutcot/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "layoutcot/error.hpp"
#include "numeric.hpp"

namespace layoutcot {

using nlohmann::json;

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::ContentAware: return "content_aware";
    case TaskKind::ConstraintExplicit: return "constraint_explicit";
    case TaskKind::TextToLayout: return "text_to_layout";
  }
  return "content_aware";
}

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "content_aware") return TaskKind::ContentAware;
  if (name == "constraint_explicit") return TaskKind::ConstraintExplicit;
  if (name == "text_to_layout") return TaskKind::TextToLayout;
  throw Error(ErrorCode::ConfigError, "unknown task kind '" + name + "'");
}

bool DatasetManifest::has_label(const std::string& label) const {
  return std::find(vocabulary.begin(), vocabulary.end(), label) != vocabulary.end();
}

DatasetManifest builtin_manifest(const std::string& name) {
  DatasetManifest m;
  m.name = name;
  if (name == "pku") {
    m.task_kind = TaskKind::ContentAware;
    m.vocabulary = {"text", "logo", "underlay"};
    m.split_sizes = {{"train", 9974}, {"test", 905}};
  } else if (name == "cgl") {
    m.task_kind = TaskKind::ContentAware;
    m.vocabulary = {"text", "logo", "underlay", "embellishment", "highlighted_text"};
    m.split_sizes = {{"train", 38510}, {"test", 1647}};
  } else if (name == "rico") {
    m.task_kind = TaskKind::ConstraintExplicit;
    m.vocabulary = {"text",          "image",           "icon",        "text_button",
                    "list_item",     "input",           "background_image", "card",
                    "web_view",      "radio_button",    "drawer",      "checkbox",
                    "advertisement", "modal",           "pager_indicator", "slider",
                    "on_off_switch", "button_bar",      "toolbar",     "number_stepper",
                    "multi_tab",     "date_picker",     "map_view",    "video",
                    "bottom_navigation"};
    m.split_sizes = {{"train", 31694}, {"test", 3729}};
    m.primary_labels = {"text", "text_button"};
  } else if (name == "publaynet") {
    m.task_kind = TaskKind::ConstraintExplicit;
    m.vocabulary = {"text", "title", "list", "table", "figure"};
    m.split_sizes = {{"train", 311397}, {"test", 10998}};
    m.primary_labels = {"title", "text"};
  } else {
    throw Error(ErrorCode::ConfigError, "no built-in manifest named '" + name + "'");
  }
  return m;
}

DatasetManifest manifest_from_json(const json& j) {
  try {
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.task_kind = task_kind_from_string(j.at("task_kind").get<std::string>());
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    if (j.contains("split_sizes")) {
      m.split_sizes = j.at("split_sizes").get<std::map<std::string, std::size_t>>();
    }
    if (j.contains("primary_labels")) {
      m.primary_labels = j.at("primary_labels").get<std::vector<std::string>>();
    }
    if (m.vocabulary.empty()) throw Error(ErrorCode::ConfigError, "manifest vocabulary is empty");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad manifest: ") + e.what());
  }
}

json manifest_to_json(const DatasetManifest& m) {
  json j{{"name", m.name},
         {"task_kind", to_string(m.task_kind)},
         {"vocabulary", m.vocabulary},
         {"split_sizes", m.split_sizes}};
  if (!m.primary_labels.empty()) j["primary_labels"] = m.primary_labels;
  return j;
}

DatasetManifest resolve_manifest(const std::string& name_or_path) {
  if (std::filesystem::is_regular_file(name_or_path)) {
    std::ifstream in(name_or_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, name_or_path + ": " + e.what());
    }
    return manifest_from_json(j);
  }
  return builtin_manifest(name_or_path);
}

const LayoutRecord* CanonicalDataset::find(const std::string& id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::vector<const LayoutRecord*> CanonicalDataset::split(const std::string& name) const {
  std::vector<const LayoutRecord*> out;
  for (const auto& r : records) {
    if (r.split == name) out.push_back(&r);
  }
  return out;
}

std::map<std::string, std::size_t> CanonicalDataset::split_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.split];
  return counts;
}

std::filesystem::path CanonicalDataset::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

namespace {

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

Layout layout_from_json(const json& j) {
  Layout l;
  try {
    l.id = j.value("id", std::string{});
    const json& canvas = j.at("canvas");
    l.canvas.width = canvas.at("w").get<double>();
    l.canvas.height = canvas.at("h").get<double>();
    if (!(l.canvas.width > 0.0) || !(l.canvas.height > 0.0)) {
      throw Error(ErrorCode::SchemaError, "layout '" + l.id + "' has a non-positive canvas");
    }
    for (const json& e : j.value("elements", json::array())) {
      Element el;
      el.label = e.at("label").get<std::string>();
      const auto box = e.at("bbox").get<std::vector<double>>();
      if (box.size() != 4) {
        throw Error(ErrorCode::SchemaError, "layout '" + l.id + "': bbox needs 4 numbers");
      }
      if (box[2] < 0.0 || box[3] < 0.0) {
        throw Error(ErrorCode::SchemaError, "layout '" + l.id + "': negative bbox size");
      }
      el.bbox = BBox{box[0], box[1], box[2], box[3]};
      el.locked = e.value("locked", false);
      l.elements.push_back(std::move(el));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed layout: ") + e.what());
  }
  return l;
}

json layout_to_json(const Layout& layout) {
  const Layout px = denormalize(layout);
  json elements = json::array();
  for (const auto& e : px.elements) {
    json el{{"label", e.label},
            {"bbox", {e.bbox.left, e.bbox.top, e.bbox.width, e.bbox.height}}};
    if (e.locked) el["locked"] = true;
    elements.push_back(std::move(el));
  }
  return json{{"canvas", {{"w", px.canvas.width}, {"h", px.canvas.height}}},
              {"elements", std::move(elements)}};
}

LayoutRecord record_from_json(const json& j) {
  LayoutRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.split = j.value("split", std::string{});
    r.pixel = layout_from_json(j);
    r.pixel.id = r.id;
    r.saliency = optional_string(j, "saliency");
    r.gradient = optional_string(j, "gradient");
    r.text = optional_string(j, "text");
    if (j.contains("constraints") && !j.at("constraints").is_null()) {
      r.constraints = j.at("constraints");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed record: ") + e.what());
  }
  r.pixel.meta.source_text = r.text;
  r.pixel.canvas.background_ref = r.saliency;
  r.normalized = normalize(r.pixel);
  return r;
}

json record_to_json(const LayoutRecord& r) {
  json j{{"id", r.id}, {"split", r.split}};
  j.update(layout_to_json(r.pixel));
  if (r.saliency) j["saliency"] = *r.saliency;
  if (r.gradient) j["gradient"] = *r.gradient;
  if (r.text) j["text"] = *r.text;
  if (r.constraints) j["constraints"] = *r.constraints;
  return j;
}

CanonicalDataset ingest(std::istream& source, const DatasetManifest& manifest,
                        const IngestOptions& options) {
  CanonicalDataset ds;
  ds.manifest = manifest;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    LayoutRecord r = record_from_json(j);
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::SchemaError, "duplicate record id '" + r.id + "'");
    }
    const auto unknown = std::find_if(r.pixel.elements.begin(), r.pixel.elements.end(),
                                      [&](const Element& e) { return !manifest.has_label(e.label); });
    if (unknown != r.pixel.elements.end()) {
      if (options.strict) {
        throw Error(ErrorCode::VocabularyError, "record '" + r.id + "' uses label '" +
                                                    unknown->label + "' outside the vocabulary");
      }
      ds.warnings.push_back("record '" + r.id + "' rejected: unknown label '" + unknown->label + "'");
      continue;
    }
    ds.records.push_back(std::move(r));
  }

  const auto counts = ds.split_counts();
  for (const auto& [split, expected] : manifest.split_sizes) {
    const auto it = counts.find(split);
    const std::size_t got = it == counts.end() ? 0 : it->second;
    if (got != expected && !ds.records.empty()) {
      ds.warnings.push_back("split '" + split + "' has " + std::to_string(got) +
                            " records, manifest declares " + std::to_string(expected));
    }
  }
  return ds;
}

CanonicalDataset ingest_file(const std::filesystem::path& path, const DatasetManifest& manifest,
                             const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  CanonicalDataset ds = ingest(in, manifest, options);
  ds.base_dir = path.parent_path();
  return ds;
}

void export_jsonl(const CanonicalDataset& dataset, std::ostream& out) {
  for (const auto& r : dataset.records) out << record_to_json(r).dump() << '\n';
}

AreaStats compute_area_stats(const CanonicalDataset& dataset, const std::string& split) {
  const auto records = dataset.split(split);
  if (records.empty()) throw Error(ErrorCode::EmptySplit, "split '" + split + "' is empty");

  std::map<std::string, detail::CompensatedSum> sums;
  std::map<std::string, std::size_t> counts;
  for (const LayoutRecord* r : records) {
    for (const auto& e : r->normalized.elements) {
      sums[e.label].add(e.bbox.width * e.bbox.height);
      ++counts[e.label];
    }
  }
  AreaStats stats;
  for (const auto& [label, sum] : sums) {
    stats.mean_area[label] = sum.value() / static_cast<double>(counts[label]);
  }
  return stats;
}

json area_stats_to_json(const AreaStats& stats) { return json{{"mean_area", stats.mean_area}}; }

AreaStats area_stats_from_json(const json& j) {
  try {
    AreaStats s;
    s.mean_area = j.at("mean_area").get<std::map<std::string, double>>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("bad area stats: ") + e.what());
  }
}

}  // namespace layoutcot
