#include "layoutcot/constraint.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "layoutcot/error.hpp"
#include "layoutcot/hash.hpp"
#include "layoutcot/html.hpp"

namespace layoutcot {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr const char* kKindNames[] = {"gen_t",      "gen_ts",        "gen_r",         "completion",
                                      "refinement", "content_aware", "text_to_layout"};
constexpr const char* kRelationNames[] = {"above", "below", "left-of", "right-of", "larger", "smaller", "equal"};

std::size_t total(const std::vector<CategoryCount>& categories) {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.count;
  return n;
}

void check_categories(const std::vector<CategoryCount>& categories) {
  for (const auto& c : categories) {
    if (c.label.empty()) throw Error(ErrorCode::InvalidPayload, "category with empty label");
    if (c.count == 0) throw Error(ErrorCode::InvalidPayload, "category '" + c.label + "' has count 0");
  }
}

std::string category_lines(const std::vector<CategoryCount>& categories) {
  std::ostringstream os;
  os << "Element types and counts:";
  for (const auto& c : categories) os << "\n- " << c.label << ": " << c.count;
  return os.str();
}

std::string relation_phrase(Relation r) {
  switch (r) {
    case Relation::Above: return "is above";
    case Relation::Below: return "is below";
    case Relation::LeftOf: return "is left of";
    case Relation::RightOf: return "is right of";
    case Relation::Larger: return "is larger than";
    case Relation::Smaller: return "is smaller than";
    case Relation::Equal: return "is equal in size to";
  }
  return "";
}

// "text 2": label plus 1-based ordinal among instances with that label.
std::vector<std::string> instance_names(const std::vector<std::string>& instances) {
  std::map<std::string, int> seen;
  std::vector<std::string> names;
  for (const auto& label : instances) names.push_back(label + " " + std::to_string(++seen[label]));
  return names;
}

std::string px(double v) { return std::to_string(round_half_up(v)) + "px"; }

std::vector<CategoryCount> categories_from_json(const json& j) {
  std::vector<CategoryCount> out;
  if (j.is_object()) {
    for (const auto& [label, count] : j.items()) out.push_back({label, count.get<std::size_t>()});
  } else if (j.is_array()) {
    for (const json& c : j) out.push_back({c.at("label").get<std::string>(), c.at("count").get<std::size_t>()});
  } else {
    throw Error(ErrorCode::InvalidPayload, "categories must be an object or an array");
  }
  return out;
}

json categories_to_json(const std::vector<CategoryCount>& categories) {
  json out = json::array();
  for (const auto& c : categories) out.push_back({{"label", c.label}, {"count", c.count}});
  return out;
}

std::vector<CategoryCount> count_labels(const Layout& layout) {
  std::vector<CategoryCount> out;
  for (const auto& e : layout.elements) {
    auto it = std::find_if(out.begin(), out.end(), [&](const CategoryCount& c) { return c.label == e.label; });
    if (it == out.end()) {
      out.push_back({e.label, 1});
    } else {
      ++it->count;
    }
  }
  return out;
}

}  // namespace

const char* to_string(Relation r) { return kRelationNames[static_cast<int>(r)]; }

Relation relation_from_string(const std::string& token) {
  for (int i = 0; i < 7; ++i) {
    if (token == kRelationNames[i]) return static_cast<Relation>(i);
  }
  throw Error(ErrorCode::InvalidPayload, "unknown relation '" + token + "'");
}

const char* to_string(ConstraintKind kind) { return kKindNames[static_cast<int>(kind)]; }

ConstraintKind constraint_kind_from_string(const std::string& token) {
  for (int i = 0; i < 7; ++i) {
    if (token == kKindNames[i]) return static_cast<ConstraintKind>(i);
  }
  throw Error(ErrorCode::InvalidPayload, "unknown constraint kind '" + token + "'");
}

TaskKind family_of(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::ContentAware: return TaskKind::ContentAware;
    case ConstraintKind::TextToLayout: return TaskKind::TextToLayout;
    default: return TaskKind::ConstraintExplicit;
  }
}

ConstraintSpec::ConstraintSpec(Canvas canvas, ConstraintPayload payload)
    : canvas_(std::move(canvas)), payload_(std::move(payload)) {
  if (!(canvas_.width > 0.0) || !(canvas_.height > 0.0)) {
    throw Error(ErrorCode::InvalidPayload, "constraint canvas must be positive");
  }
  std::visit(Overloaded{
                 [](const GenTPayload& p) { check_categories(p.categories); },
                 [](const GenTSPayload& p) {
                   for (const auto& e : p.elements) {
                     if (e.label.empty() || !(e.width > 0.0) || !(e.height > 0.0)) {
                       throw Error(ErrorCode::InvalidPayload, "sized element needs a label and positive size");
                     }
                   }
                 },
                 [](const GenRPayload& p) {
                   check_categories(p.categories);
                   const std::size_t n = total(p.categories);
                   for (const auto& r : p.relations) {
                     if (r.subject >= n || r.object >= n || r.subject == r.object) {
                       throw Error(ErrorCode::InvalidPayload, "relation refers to a missing element");
                     }
                   }
                 },
                 [](const CompletionPayload& p) {
                   if (!(p.partial.canvas.width > 0.0) || !(p.partial.canvas.height > 0.0)) {
                     throw Error(ErrorCode::InvalidPayload, "partial layout needs a canvas");
                   }
                 },
                 [](const RefinementPayload& p) {
                   if (!(p.noisy.canvas.width > 0.0) || !(p.noisy.canvas.height > 0.0)) {
                     throw Error(ErrorCode::InvalidPayload, "noisy layout needs a canvas");
                   }
                 },
                 [](const ContentAwarePayload& p) { check_categories(p.categories); },
                 [](const TextToLayoutPayload& p) {
                   if (p.description.empty()) throw Error(ErrorCode::InvalidPayload, "empty text description");
                   check_categories(p.categories);
                 },
             },
             payload_);
}

std::vector<CategoryCount> ConstraintSpec::categories() const {
  return std::visit(Overloaded{
                        [](const GenTPayload& p) { return p.categories; },
                        [](const GenTSPayload& p) {
                          std::vector<CategoryCount> out;
                          for (const auto& e : p.elements) {
                            auto it = std::find_if(out.begin(), out.end(),
                                                   [&](const CategoryCount& c) { return c.label == e.label; });
                            if (it == out.end()) {
                              out.push_back({e.label, 1});
                            } else {
                              ++it->count;
                            }
                          }
                          return out;
                        },
                        [](const GenRPayload& p) { return p.categories; },
                        [](const CompletionPayload&) { return std::vector<CategoryCount>{}; },
                        [](const RefinementPayload&) { return std::vector<CategoryCount>{}; },
                        [](const ContentAwarePayload& p) { return p.categories; },
                        [](const TextToLayoutPayload& p) { return p.categories; },
                    },
                    payload_);
}

std::vector<std::string> ConstraintSpec::instances() const {
  std::vector<std::string> out;
  for (const auto& c : categories()) out.insert(out.end(), c.count, c.label);
  return out;
}

std::string render_constraint(const ConstraintSpec& spec) {
  return std::visit(
      Overloaded{
          [](const GenTPayload& p) { return category_lines(p.categories); },
          [](const GenTSPayload& p) {
            std::ostringstream os;
            os << "Elements with fixed sizes (keep each width and height as given):";
            for (const auto& e : p.elements) {
              os << "\n- " << e.label << ": width " << px(e.width) << ", height " << px(e.height);
            }
            return os.str();
          },
          [&](const GenRPayload& p) {
            std::string out = category_lines(p.categories);
            if (p.relations.empty()) return out;
            const auto names = instance_names(spec.instances());
            out += "\nRelations (elements numbered per type in the order above):";
            for (const auto& r : p.relations) {
              out += "\n- " + names[r.subject] + " " + relation_phrase(r.relation) + " " + names[r.object];
            }
            return out;
          },
          [](const CompletionPayload& p) {
            return "Complete this partial layout. Keep every element it contains fixed and add the "
                   "missing elements:\n" +
                   to_html(p.partial).text;
          },
          [](const RefinementPayload& p) {
            std::string out = "Refine this noisy layout into a clean one:\n" + to_html(p.noisy).text;
            Layout locked = p.noisy;
            std::erase_if(locked.elements, [](const Element& e) { return !e.locked; });
            if (!locked.elements.empty()) {
              out += "\nLocked elements (do not move or resize):";
              for (const auto& e : denormalize(locked).elements) {
                out += "\n- " + e.label + " at left:" + px(e.bbox.left) + "; top:" + px(e.bbox.top) +
                       "; width:" + px(e.bbox.width) + "; height:" + px(e.bbox.height);
              }
            }
            return out;
          },
          [&](const ContentAwarePayload& p) {
            std::string out = "Canvas: width " + px(spec.canvas().width) + ", height " + px(spec.canvas().height);
            if (p.categories.empty()) return out + "\nRequired elements: any";
            out += "\nRequired elements:";
            for (const auto& c : p.categories) out += "\n- " + c.label + ": " + std::to_string(c.count);
            return out;
          },
          [](const TextToLayoutPayload& p) { return p.description; },
      },
      spec.payload());
}

std::string constraint_digest(const ConstraintSpec& spec) { return sha256_hex(render_constraint(spec)); }

ConstraintSpec constraint_from_json(const json& j, const Canvas& fallback) {
  try {
    Canvas canvas = fallback;
    if (j.contains("canvas")) {
      canvas.width = j.at("canvas").at("w").get<double>();
      canvas.height = j.at("canvas").at("h").get<double>();
    }
    const ConstraintKind kind = constraint_kind_from_string(j.at("kind").get<std::string>());
    const auto cats = [&] {
      return j.contains("categories") ? categories_from_json(j.at("categories")) : std::vector<CategoryCount>{};
    };
    switch (kind) {
      case ConstraintKind::GenT: return {canvas, GenTPayload{cats()}};
      case ConstraintKind::GenTS: {
        GenTSPayload p;
        for (const json& e : j.at("elements")) {
          p.elements.push_back({e.at("label").get<std::string>(), e.at("width").get<double>(),
                                e.at("height").get<double>()});
        }
        return {canvas, p};
      }
      case ConstraintKind::GenR: {
        GenRPayload p{cats(), {}};
        for (const json& r : j.value("relations", json::array())) {
          p.relations.push_back({r.at("subject").get<std::size_t>(),
                                 relation_from_string(r.at("relation").get<std::string>()),
                                 r.at("object").get<std::size_t>()});
        }
        return {canvas, p};
      }
      case ConstraintKind::Completion: return {canvas, CompletionPayload{layout_from_json(j.at("partial"))}};
      case ConstraintKind::Refinement: return {canvas, RefinementPayload{layout_from_json(j.at("noisy"))}};
      case ConstraintKind::ContentAware: {
        ContentAwarePayload p;
        p.categories = cats();
        if (j.contains("saliency")) p.saliency = j.at("saliency").get<std::string>();
        if (j.contains("gradient")) p.gradient = j.at("gradient").get<std::string>();
        return {canvas, p};
      }
      case ConstraintKind::TextToLayout:
        return {canvas, TextToLayoutPayload{j.at("text").get<std::string>(), cats()}};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidPayload, std::string("malformed constraint: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw Error(ErrorCode::InvalidPayload, e.what());
    throw;
  }
  throw Error(ErrorCode::InvalidPayload, "unhandled constraint kind");
}

json constraint_to_json(const ConstraintSpec& spec) {
  json j{{"kind", to_string(spec.kind())},
         {"canvas", {{"w", spec.canvas().width}, {"h", spec.canvas().height}}}};
  std::visit(Overloaded{
                 [&](const GenTPayload& p) { j["categories"] = categories_to_json(p.categories); },
                 [&](const GenTSPayload& p) {
                   json elements = json::array();
                   for (const auto& e : p.elements) {
                     elements.push_back({{"label", e.label}, {"width", e.width}, {"height", e.height}});
                   }
                   j["elements"] = elements;
                 },
                 [&](const GenRPayload& p) {
                   j["categories"] = categories_to_json(p.categories);
                   json relations = json::array();
                   for (const auto& r : p.relations) {
                     relations.push_back({{"subject", r.subject}, {"relation", to_string(r.relation)}, {"object", r.object}});
                   }
                   j["relations"] = relations;
                 },
                 [&](const CompletionPayload& p) { j["partial"] = layout_to_json(p.partial); },
                 [&](const RefinementPayload& p) { j["noisy"] = layout_to_json(p.noisy); },
                 [&](const ContentAwarePayload& p) {
                   j["categories"] = categories_to_json(p.categories);
                   if (p.saliency) j["saliency"] = *p.saliency;
                   if (p.gradient) j["gradient"] = *p.gradient;
                 },
                 [&](const TextToLayoutPayload& p) {
                   j["text"] = p.description;
                   if (!p.categories.empty()) j["categories"] = categories_to_json(p.categories);
                 },
             },
             spec.payload());
  return j;
}

ConstraintSpec constraint_for_record(const LayoutRecord& record, TaskKind task) {
  const Canvas canvas{record.pixel.canvas.width, record.pixel.canvas.height, std::nullopt};
  if (record.constraints) return constraint_from_json(*record.constraints, canvas);
  switch (task) {
    case TaskKind::ContentAware:
      return {canvas, ContentAwarePayload{count_labels(record.pixel), record.saliency, record.gradient}};
    case TaskKind::TextToLayout:
      if (!record.text) {
        throw Error(ErrorCode::InvalidPayload, "record '" + record.id + "' has no text for text-to-layout");
      }
      return {canvas, TextToLayoutPayload{*record.text, count_labels(record.pixel)}};
    case TaskKind::ConstraintExplicit:
      return {canvas, GenTPayload{count_labels(record.pixel)}};
  }
  throw Error(ErrorCode::InvalidPayload, "unhandled task kind");
}

}  // namespace layoutcot
