// layoutcot command-line tool.
#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "layoutcot/constraint.hpp"
#include "layoutcot/dataset.hpp"
#include "layoutcot/error.hpp"
#include "layoutcot/gateway.hpp"
#include "layoutcot/hash.hpp"
#include "layoutcot/html.hpp"
#include "layoutcot/metrics.hpp"
#include "layoutcot/pipeline.hpp"
#include "layoutcot/prompt.hpp"
#include "layoutcot/raster.hpp"
#include "layoutcot/retrieval.hpp"
#include "layoutcot/svg.hpp"

namespace lc = layoutcot;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mode;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lc::Error(lc::ErrorCode::IoError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw lc::Error(lc::ErrorCode::SchemaError, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw lc::Error(lc::ErrorCode::IoError, "cannot write " + path);
  out << text;
}

// A layout from a .json layout file, an HTML snippet, or one record of a
// JSONL file selected by id.
lc::Layout load_layout(const std::string& path, const std::string& id) {
  const std::string text = slurp(path);
  if (!id.empty()) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line);
      if (j.value("id", std::string{}) == id) return lc::record_from_json(j).pixel;
    }
    throw lc::Error(lc::ErrorCode::SchemaError, "no record '" + id + "' in " + path);
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return lc::layout_from_json(json::parse(text));
  return lc::parse_html(text).layout;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

lc::RunOverrides overrides(const Globals& g) {
  lc::RunOverrides o;
  o.seed = g.seed;
  if (!g.mode.empty()) o.mode = lc::backend_mode_from_string(g.mode);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LayoutCoT layout generation engine"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run config (JSON)");
  app.add_option("--seed", g.seed, "Seed for randomized ablations");
  app.add_option("--mode", g.mode, "LLM backend mode")->check(CLI::IsMember({"live", "record", "replay"}));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a JSONL dataset");
  std::string records, manifest = "pku", out, stats_out, split = "train";
  bool strict = false;
  ingest->add_option("--records", records, "Records (JSONL)")->required();
  ingest->add_option("--manifest", manifest, "Built-in manifest name or manifest file");
  ingest->add_flag("--strict", strict, "Fail on labels outside the vocabulary");
  ingest->add_option("--out", out, "Write the canonical JSONL here");
  ingest->add_option("--stats", stats_out, "Write per-label mean areas of --split here");
  ingest->add_option("--split", split, "Split for --stats");

  // index build / query
  auto* index_cmd = app.add_subcommand("index", "Build or query a retrieval index");
  index_cmd->require_subcommand(1);
  auto* index_build = index_cmd->add_subcommand("build", "Index one split of a dataset");
  std::string index_path;
  double geo_weight = 0.5, label_weight = 0.5;
  index_build->add_option("--records", records, "Records (JSONL)")->required();
  index_build->add_option("--manifest", manifest, "Built-in manifest name or manifest file");
  index_build->add_option("--split", split, "Split to index");
  index_build->add_option("--out", index_path, "Index file")->required();
  index_build->add_option("--geometric-weight", geo_weight, "Geometric cost weight");
  index_build->add_option("--label-weight", label_weight, "Label mismatch cost weight");

  std::string query_path, query_id;
  std::size_t k = 10;
  double scale = 1.0;
  bool exclude_self = false;
  const auto add_query_options = [&](CLI::App* cmd) {
    cmd->add_option("--index", index_path, "Index file")->required();
    cmd->add_option("--query", query_path, "Query layout (.json, HTML, or JSONL with --id)")->required();
    cmd->add_option("--id", query_id, "Record id inside a JSONL query file");
    cmd->add_option("--k", k, "Number of hits")->check(CLI::PositiveNumber);
    cmd->add_option("--scale", scale, "LTSim scale");
    cmd->add_flag("--exclude-self", exclude_self, "Skip the entry with the query's id");
  };
  auto* index_query = index_cmd->add_subcommand("query", "Top-k most similar index entries");
  add_query_options(index_query);
  auto* retrieve = app.add_subcommand("retrieve", "Top-k most similar index entries");
  add_query_options(retrieve);

  // generate
  auto* generate = app.add_subcommand("generate", "Run the generation pipeline over a dataset split");
  bool no_rag = false, no_cot = false;
  std::optional<int> stages;
  std::optional<std::size_t> limit;
  std::string output_dir;
  generate->add_flag("--no-rag", no_rag, "Random exemplars instead of retrieval");
  generate->add_flag("--no-cot", no_cot, "Skip the refinement stages");
  generate->add_option("--stages", stages, "Number of refinement stages")->check(CLI::Range(0, 3));
  generate->add_option("--limit", limit, "Process at most this many items");
  generate->add_option("--out", output_dir, "Run directory (overrides the config)");

  // eval
  auto* eval = app.add_subcommand("eval", "Score generated layouts");
  std::string generated_path, reference_path, task = "content_aware", format = "pretty", stats_path;
  std::vector<std::string> metric_ids;
  eval->add_option("--generated", generated_path, "Generated layouts (JSONL)")->required();
  eval->add_option("--dataset,--reference", reference_path, "Reference records (JSONL)");
  eval->add_option("--task", task, "Task family")
      ->check(CLI::IsMember({"content_aware", "constraint_explicit", "text_to_layout"}));
  eval->add_option("--stats", stats_path, "Training area stats for R_e");
  eval->add_option("--metrics", metric_ids, "Metric ids, e.g. align,ove,val")->delimiter(',');
  eval->add_option("--format", format, "Output format")->check(CLI::IsMember({"pretty", "tsv"}));

  // render
  auto* render = app.add_subcommand("render", "Draw a layout as SVG");
  std::string layout_path, layout_id, background_path;
  bool no_labels = false;
  render->add_option("--layout", layout_path, "Layout (.json, HTML, or JSONL with --id)")->required();
  render->add_option("--id", layout_id, "Record id inside a JSONL file");
  render->add_option("--background", background_path, "Grayscale PGM drawn under the layout");
  render->add_flag("--no-labels", no_labels, "Omit label captions");
  render->add_option("--out", out, "SVG file (default stdout)");

  // prompts render
  auto* prompts = app.add_subcommand("prompts", "Inspect prompt templates");
  prompts->require_subcommand(1);
  auto* prompts_render = prompts->add_subcommand("render", "Render one template for a dataset record");
  std::string family = "content_aware", stage = "coarse", templates_dir, db_split = "train";
  prompts_render->add_option("--family", family, "Template family")
      ->check(CLI::IsMember({"content_aware", "constraint_explicit", "text_to_layout"}));
  prompts_render->add_option("--stage", stage, "coarse, 1, 2 or 3")->check(CLI::IsMember({"coarse", "1", "2", "3"}));
  prompts_render->add_option("--records", records, "Records (JSONL)")->required();
  prompts_render->add_option("--manifest", manifest, "Built-in manifest name or manifest file");
  prompts_render->add_option("--id", query_id, "Record the prompt is built for")->required();
  prompts_render->add_option("--database-split", db_split, "Split exemplars are retrieved from");
  prompts_render->add_option("--k", k, "Exemplar count")->check(CLI::PositiveNumber);
  prompts_render->add_option("--templates", templates_dir, "Template directory (default built-in)");

  // gateway
  auto* gateway = app.add_subcommand("gateway", "LLM backend utilities");
  gateway->require_subcommand(1);
  auto* ping = gateway->add_subcommand("ping", "Send one short live request");
  auto* replay_check = gateway->add_subcommand("replay-check", "Verify that transcript files match their keys");
  std::string transcripts;
  replay_check->add_option("--transcripts", transcripts, "Transcript directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) {
      const auto ds = lc::ingest_file(records, lc::resolve_manifest(manifest), {strict});
      print_warnings(ds.warnings);
      for (const auto& [name, count] : ds.split_counts()) std::cout << name << '\t' << count << '\n';
      if (!out.empty()) {
        std::ofstream os(out);
        lc::export_jsonl(ds, os);
      }
      if (!stats_out.empty()) write_text(stats_out, lc::area_stats_to_json(lc::compute_area_stats(ds, split)).dump(2) + "\n");
    } else if (*index_build) {
      const auto ds = lc::ingest_file(records, lc::resolve_manifest(manifest));
      print_warnings(ds.warnings);
      std::vector<std::string> warnings;
      const auto index = lc::build_index(ds, split, {geo_weight, label_weight}, &warnings);
      print_warnings(warnings);
      lc::save_index(index, index_path);
      std::cout << index.entries.size() << " entries\n";
    } else if (*index_query || *retrieve) {
      const auto index = lc::load_index(index_path);
      lc::Layout query = load_layout(query_path, query_id);
      if (!query_id.empty()) query.id = query_id;
      lc::RetrievalOptions opts;
      opts.k = k;
      opts.scale = scale;
      opts.exclude_self = exclude_self;
      for (const auto& hit : lc::topk_retrieve(query, index, opts)) {
        std::cout << hit.id << '\t' << std::fixed << std::setprecision(6) << hit.similarity << '\n';
      }
    } else if (*generate) {
      if (g.config.empty()) throw CLI::RequiredError("--config");
      auto config = lc::load_run_config(g.config);
      auto o = overrides(g);
      if (no_rag) o.no_rag = true;
      if (no_cot) o.no_cot = true;
      o.stages = stages;
      o.limit = limit;
      if (!output_dir.empty()) o.output_dir = std::filesystem::absolute(output_dir);
      lc::apply_overrides(config, o);
      const auto summary = lc::run_task(config);
      std::cout << "run directory: " << summary.output_dir.string() << '\n'
                << "items: " << summary.items << ", failed: " << summary.failures << '\n'
                << lc::format_pretty(summary.report);
    } else if (*eval) {
      std::map<std::string, lc::LayoutRecord> refs;
      std::filesystem::path ref_base;
      if (!reference_path.empty()) {
        ref_base = std::filesystem::path(reference_path).parent_path();
        std::istringstream in(slurp(reference_path));
        std::string line;
        while (std::getline(in, line)) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          auto r = lc::record_from_json(json::parse(line));
          refs.emplace(r.id, std::move(r));
        }
      }
      std::vector<lc::EvaluationItem> items;
      std::istringstream in(slurp(generated_path));
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json j = json::parse(line);
        if (j.value("status", std::string("ok")) != "ok") continue;
        lc::EvaluationItem item;
        item.generated = lc::layout_from_json(j);
        if (const auto it = refs.find(j.value("id", std::string{})); it != refs.end()) {
          const auto& r = it->second;
          if (!r.pixel.empty()) item.reference = r.pixel;
          const auto resolve = [&](const std::string& p) {
            return std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : ref_base / p;
          };
          if (r.saliency) item.saliency = lc::load_raster(resolve(*r.saliency));
          if (r.gradient) item.gradient = lc::load_raster(resolve(*r.gradient));
        }
        items.push_back(std::move(item));
      }
      lc::EvaluationOptions opts;
      opts.task = lc::task_kind_from_string(task);
      opts.metrics = metric_ids;
      if (!stats_path.empty()) opts.area_stats = lc::area_stats_from_json(read_json(stats_path));
      const auto report = lc::evaluate_population(items, opts);
      std::cout << (format == "tsv" ? lc::format_tsv(report) : lc::format_pretty(report));
    } else if (*render) {
      const lc::Layout layout = load_layout(layout_path, layout_id);
      lc::RenderStyle style;
      style.show_labels = !no_labels;
      std::optional<lc::SaliencyRaster> bg;
      if (!background_path.empty()) bg = lc::load_raster(background_path);
      write_text(out, lc::render_svg(layout, style, bg));
    } else if (*prompts_render) {
      const auto m = lc::resolve_manifest(manifest);
      const auto ds = lc::ingest_file(records, m);
      const lc::LayoutRecord* record = ds.find(query_id);
      if (!record) throw lc::Error(lc::ErrorCode::SchemaError, "no record '" + query_id + "'");
      const auto catalog = templates_dir.empty() ? lc::TemplateCatalog::builtin() : lc::TemplateCatalog::load(templates_dir);
      const auto index = lc::build_index(ds, db_split);
      lc::PipelineContext ctx;
      ctx.index = &index;
      ctx.prompt = lc::prompt_context(m);
      ctx.area_stats = lc::compute_area_stats(ds, db_split);
      const lc::TaskKind fam = lc::task_kind_from_string(family);
      const auto constraint = lc::constraint_for_record(*record, fam);
      const auto exemplars = lc::select_exemplars(lc::retrieval_query(record->normalized, constraint, ctx),
                                                  record->id, k, ctx);
      const lc::PromptBundle bundle =
          stage == "coarse"
              ? lc::build_coarse_prompt(catalog, exemplars, constraint, ctx.prompt)
              : lc::build_stage_prompt(catalog, std::stoi(stage), fam, exemplars,
                                       record->pixel.empty() ? exemplars.front() : record->pixel, constraint,
                                       ctx.prompt);
      std::cout << "### template " << bundle.provenance.template_id << "\n### system\n"
                << bundle.system << "\n### user\n" << bundle.user << '\n';
    } else if (*ping) {
      lc::BackendConfig cfg;
      if (!g.config.empty()) cfg = lc::load_run_config(g.config).backend;
      cfg.mode = lc::BackendMode::Live;
      cfg = lc::apply_environment(cfg);
      const lc::Gateway gw(cfg);
      const lc::PromptBundle bundle{"You are a connectivity check.", "Reply with the single word OK.", {}};
      std::cout << gw.complete(bundle, 1, 0.0).front() << '\n';
    } else if (*replay_check) {
      const lc::TranscriptStore store(transcripts);
      std::size_t bad = 0;
      const auto keys = store.keys();
      for (const auto& key : keys) {
        const auto t = store.load(key);
        const std::string rehash = lc::sha256_hex(t->request.dump());
        if (t->key != key || rehash != key) {
          ++bad;
          std::cout << "mismatch\t" << key << '\n';
        }
      }
      std::cout << keys.size() << " transcripts, " << bad << " mismatched\n";
      if (bad) throw lc::Error(lc::ErrorCode::SchemaError, "transcript keys do not match their requests");
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const lc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
