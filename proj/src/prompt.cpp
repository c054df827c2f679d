#include "layoutcot/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "embedded_templates.hpp"
#include "layoutcot/error.hpp"
#include "layoutcot/html.hpp"

namespace layoutcot {

namespace {

constexpr TaskKind kFamilies[] = {TaskKind::ContentAware, TaskKind::ConstraintExplicit,
                                  TaskKind::TextToLayout};

std::string stage_token(int stage) { return stage == kCoarseStage ? "coarse" : std::to_string(stage); }

// "a", "a and b", "a, b, and c"
std::string join_list(const std::vector<std::string>& items) {
  if (items.empty()) return "none";
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " and " + items[1];
  std::string out;
  for (std::size_t i = 0; i + 1 < items.size(); ++i) out += items[i] + ", ";
  return out + "and " + items.back();
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  if (items.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::size_t vocab_number(const std::vector<std::string>& vocabulary, const std::string& label) {
  return static_cast<std::size_t>(std::find(vocabulary.begin(), vocabulary.end(), label) - vocabulary.begin()) + 1;
}

std::vector<std::string> resolve_primary(const PromptContext& ctx) {
  std::vector<std::string> primary;
  for (const auto& l : ctx.primary_labels) {
    if (std::find(ctx.vocabulary.begin(), ctx.vocabulary.end(), l) != ctx.vocabulary.end()) primary.push_back(l);
  }
  if (!primary.empty()) return primary;
  for (const char* key : {"title", "text"}) {
    for (const auto& l : ctx.vocabulary) {
      if (l.find(key) != std::string::npos && std::find(primary.begin(), primary.end(), l) == primary.end()) {
        primary.push_back(l);
        break;
      }
    }
  }
  if (primary.empty() && !ctx.vocabulary.empty()) primary.push_back(ctx.vocabulary.front());
  return primary;
}

void bind_labels(std::map<std::string, std::string>& b, const PromptContext& ctx) {
  const auto& vocab = ctx.vocabulary;
  b["NUM_ELEMENT_TYPES"] = std::to_string(vocab.size());
  std::vector<std::string> numbered;
  for (std::size_t i = 0; i < vocab.size(); ++i) numbered.push_back(std::to_string(i + 1) + ") " + vocab[i]);
  b["ELEMENT_TYPE_LIST"] = join(numbered, ", ");

  const auto primary = resolve_primary(ctx);
  std::vector<std::string> secondary;
  for (const auto& l : vocab) {
    if (std::find(primary.begin(), primary.end(), l) == primary.end()) secondary.push_back(l);
  }
  const auto spaced = [&](const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    for (const auto& l : labels) out.push_back(l + " (" + std::to_string(vocab_number(vocab, l)) + ")");
    return out;
  };
  const auto compact = [&](const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    for (const auto& l : labels) out.push_back(l + "(" + std::to_string(vocab_number(vocab, l)) + ")");
    return out;
  };
  b["PRIMARY_LABELS"] = join_list(spaced(primary));
  b["PRIMARY_LABELS_AMP"] = join(spaced(primary), " & ");
  b["PRIMARY_LABELS_SHORT"] = join(primary, " & ");
  b["PRIMARY_LABELS_COMPACT"] = join(compact(primary), " & ");
  b["SECONDARY_LABELS"] = join_list(spaced(secondary));
  b["SECONDARY_LABELS_COMPACT"] = join(compact(secondary), ", ");
}

std::map<std::string, std::string> common_bindings(const std::vector<Layout>& exemplars,
                                                   const ConstraintSpec& constraint,
                                                   const PromptContext& ctx, PromptProvenance& prov) {
  if (exemplars.empty()) throw Error(ErrorCode::EmptyExemplars, "prompt needs at least one exemplar");
  std::map<std::string, std::string> b;
  std::string snippets;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    if (i) snippets += '\n';
    snippets += to_html(exemplars[i]).text;
    prov.exemplar_ids.push_back(exemplars[i].id);
  }
  b["LEN_TOPK"] = std::to_string(exemplars.size());
  b["TOPK_HTML_STR"] = snippets;
  b["REFERENCES_STR"] = snippets;
  b["CONSTRAINT"] = render_constraint(constraint);
  b["CANVAS_WIDTH"] = std::to_string(round_half_up(constraint.canvas().width));
  b["CANVAS_HEIGHT"] = std::to_string(round_half_up(constraint.canvas().height));
  if (const auto* t = std::get_if<TextToLayoutPayload>(&constraint.payload())) b["TEXT_DESCRIPTION"] = t->description;
  bind_labels(b, ctx);
  prov.constraint_digest = constraint_digest(constraint);
  return b;
}

PromptBundle render_bundle(const PromptTemplate& t, const std::map<std::string, std::string>& b,
                           PromptProvenance prov) {
  prov.template_id = to_string(t.id);
  return {render_template(t.system_text, b), render_template(t.user_text, b), std::move(prov)};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnknownTemplate, "missing template file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PromptTemplate make_template(TemplateId id, std::string sys, std::string usr) {
  PromptTemplate t{id, std::move(sys), std::move(usr), {}};
  for (const auto& n : placeholder_names(t.system_text)) t.placeholders.insert(n);
  for (const auto& n : placeholder_names(t.user_text)) t.placeholders.insert(n);
  return t;
}

}  // namespace

std::string to_string(const TemplateId& id) { return std::string(to_string(id.family)) + "/" + stage_token(id.stage); }

namespace {

struct Placeholder {
  std::size_t open = std::string::npos;
  std::size_t end = std::string::npos;  // one past the closing braces
  std::string name;
};

// Next {{NAME}} at or after `pos`, NAME being [A-Z0-9_]+. Braces around
// anything else are ordinary text.
Placeholder next_placeholder(const std::string& text, std::size_t pos) {
  while ((pos = text.find("{{", pos)) != std::string::npos) {
    std::size_t i = pos + 2;
    while (i < text.size() && (std::isupper(static_cast<unsigned char>(text[i])) ||
                               std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
      ++i;
    }
    if (i > pos + 2 && text.compare(i, 2, "}}") == 0) return {pos, i + 2, text.substr(pos + 2, i - pos - 2)};
    ++pos;
  }
  return {};
}

}  // namespace

std::vector<std::string> placeholder_names(const std::string& text) {
  std::vector<std::string> names;
  for (auto p = next_placeholder(text, 0); p.open != std::string::npos; p = next_placeholder(text, p.end)) {
    names.push_back(p.name);
  }
  return names;
}

std::string render_template(const std::string& text, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  for (auto p = next_placeholder(text, 0); p.open != std::string::npos; p = next_placeholder(text, p.end)) {
    const auto it = bindings.find(p.name);
    if (it == bindings.end()) throw Error(ErrorCode::UnboundPlaceholder, "no binding for {{" + p.name + "}}");
    out.append(text, pos, p.open - pos);
    out += it->second;
    pos = p.end;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

TemplateCatalog TemplateCatalog::builtin() {
  TemplateCatalog catalog;
  for (TaskKind family : kFamilies) {
    for (int stage = 0; stage <= 3; ++stage) {
      const std::string base = std::string(to_string(family)) + "/" + stage_token(stage);
      const char* sys = detail::embedded_template(base + ".sys.txt");
      const char* usr = detail::embedded_template(base + ".usr.txt");
      if (!sys || !usr) throw Error(ErrorCode::UnknownTemplate, "no built-in template " + base);
      catalog.add(make_template({family, stage}, sys, usr));
    }
  }
  return catalog;
}

TemplateCatalog TemplateCatalog::load(const std::filesystem::path& dir) {
  TemplateCatalog catalog;
  for (TaskKind family : kFamilies) {
    for (int stage = 0; stage <= 3; ++stage) {
      const auto base = dir / to_string(family);
      catalog.add(make_template({family, stage}, read_file(base / (stage_token(stage) + ".sys.txt")),
                                read_file(base / (stage_token(stage) + ".usr.txt"))));
    }
  }
  return catalog;
}

void TemplateCatalog::add(PromptTemplate t) {
  const TemplateId id = t.id;
  templates_.insert_or_assign(id, std::move(t));
}

const PromptTemplate& TemplateCatalog::get(TemplateId id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::UnknownTemplate, "no template " + to_string(id));
  return it->second;
}

PromptContext prompt_context(const DatasetManifest& manifest) {
  return {manifest.vocabulary, manifest.primary_labels};
}

PromptBundle build_coarse_prompt(const TemplateCatalog& catalog, const std::vector<Layout>& exemplars,
                                 const ConstraintSpec& constraint, const PromptContext& context) {
  PromptProvenance prov;
  const auto b = common_bindings(exemplars, constraint, context, prov);
  return render_bundle(catalog.get({family_of(constraint.kind()), kCoarseStage}), b, std::move(prov));
}

PromptBundle build_stage_prompt(const TemplateCatalog& catalog, int stage, TaskKind family,
                                const std::vector<Layout>& exemplars, const Layout& current,
                                const ConstraintSpec& constraint, const PromptContext& context) {
  if (stage < 1 || stage > 3) throw Error(ErrorCode::UnknownTemplate, "stage must be 1, 2 or 3");
  const PromptTemplate& t = catalog.get({family, stage});
  PromptProvenance prov;
  auto b = common_bindings(exemplars, constraint, context, prov);
  const std::string html = to_html(current).text;
  b["CURRENT_HTML"] = html;
  if (stage > 1) b["STAGE_" + std::to_string(stage - 1) + "_HTML"] = html;
  return render_bundle(t, b, std::move(prov));
}

}  // namespace layoutcot
