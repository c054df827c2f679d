#include "layoutcot/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <set>

#include "layoutcot/error.hpp"
#include "layoutcot/hash.hpp"
#include "layoutcot/raster.hpp"

namespace layoutcot {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

json provenance_to_json(const PromptProvenance& p) {
  return {{"template", p.template_id}, {"exemplars", p.exemplar_ids}, {"constraint_digest", p.constraint_digest}};
}

json optional_layout(const std::optional<Layout>& l) { return l ? layout_to_json(*l) : json(nullptr); }

Layout extracted_or_none(const Extraction& ex, std::string& failure) {
  if (const auto* f = std::get_if<ExtractionFailure>(&ex)) {
    failure = f->reason;
    return {};
  }
  return std::get<ParsedLayout>(ex).layout;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

}  // namespace

json trace_to_json(const RefinementTrace& t) {
  json candidates = json::array();
  for (const auto& c : t.candidates) {
    json cj{{"index", c.index}, {"raw", c.raw}, {"layout", optional_layout(c.layout)}};
    if (!c.failure.empty()) cj["failure"] = c.failure;
    if (c.score) {
      cj["score"] = {{"alignment", c.score->alignment},
                     {"overlap", c.score->overlap},
                     {"satisfaction", c.score->satisfaction},
                     {"score", c.score->score}};
    }
    candidates.push_back(std::move(cj));
  }
  json stages = json::array();
  for (const auto& s : t.stages) {
    json sj{{"stage", s.stage},
            {"provenance", provenance_to_json(s.provenance)},
            {"responses", s.responses},
            {"layout", optional_layout(s.parsed)},
            {"fallback", s.fallback}};
    if (!s.failure.empty()) sj["failure"] = s.failure;
    stages.push_back(std::move(sj));
  }
  json j{{"run_id", t.run_id},
         {"id", t.item_id},
         {"constraint", t.constraint},
         {"seed", t.seed},
         {"random_exemplars", t.random_exemplars},
         {"exemplars", {{"coarse", t.coarse_exemplar_ids}, {"cot", t.cot_exemplar_ids}}},
         {"coarse",
          {{"provenance", provenance_to_json(t.coarse_provenance)},
           {"candidates", std::move(candidates)},
           {"chosen", t.chosen ? json(*t.chosen) : json(nullptr)},
           {"layout", optional_layout(t.coarse)}}},
         {"stages", std::move(stages)},
         {"final", optional_layout(t.final_layout)}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

Layout retrieval_query(const Layout& layout, const ConstraintSpec& constraint, const PipelineContext& ctx) {
  if (!layout.empty()) return layout;
  std::vector<std::string> labels = constraint.instances();
  if (labels.empty()) {
    if (const auto* p = std::get_if<CompletionPayload>(&constraint.payload()); p && !p->partial.empty()) {
      return p->partial;
    }
    if (const auto* p = std::get_if<RefinementPayload>(&constraint.payload()); p && !p->noisy.empty()) {
      return p->noisy;
    }
    labels = ctx.prompt.vocabulary;
  }
  return pseudo_query(constraint.canvas(), labels, ctx.area_stats);
}

std::vector<Layout> select_exemplars(const Layout& query, const std::string& item_id, std::size_t k,
                                     const PipelineContext& ctx) {
  const RetrievalIndex& index = *ctx.index;
  std::vector<Layout> out;
  if (ctx.ablation.no_rag) {
    if (index.entries.empty()) throw Error(ErrorCode::EmptyIndex, "retrieval index is empty");
    std::vector<std::size_t> order(index.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Explicit partial Fisher-Yates: std::mt19937_64 output is fixed by the
    // standard, distributions are not.
    std::mt19937_64 rng(ctx.ablation.seed ^ fnv1a(item_id));
    const std::size_t take = std::min(k, order.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (order.size() - i));
      std::swap(order[i], order[j]);
      out.push_back(index.to_layout(index.entries[order[i]]));
    }
    return out;
  }
  RetrievalOptions opts;
  opts.k = k;
  opts.scale = ctx.generation.ltsim_scale;
  opts.exclude_self = true;
  opts.self_id = item_id;
  for (const auto& hit : topk_retrieve(query, index, opts)) out.push_back(index.to_layout(*index.find(hit.id)));
  return out;
}

Layout generate_coarse(const std::vector<Layout>& exemplars, const ConstraintSpec& constraint,
                       const PipelineContext& ctx, RefinementTrace& trace) {
  const PromptBundle bundle = build_coarse_prompt(*ctx.catalog, exemplars, constraint, ctx.prompt);
  trace.coarse_provenance = bundle.provenance;
  const std::size_t n = ctx.generation.n;
  const double temperature = ctx.generation.coarse_temperature;

  std::vector<Layout> viable;
  std::vector<std::size_t> viable_slot;
  const auto round = [&](std::size_t first) {
    const auto responses = ctx.gateway->complete(bundle, n, temperature, first);
    for (std::size_t i = 0; i < n; ++i) {
      CoarseCandidate c;
      c.index = first + i;
      c.raw = responses[i];
      Layout l = extracted_or_none(extract_layout(c.raw, ctx.prompt.vocabulary, constraint.canvas()), c.failure);
      if (c.failure.empty()) {
        l.id = trace.item_id;
        c.layout = l;
        viable.push_back(std::move(l));
        viable_slot.push_back(trace.candidates.size());
      }
      trace.candidates.push_back(std::move(c));
    }
  };
  round(0);
  if (viable.empty() && ctx.gateway->can_serve(bundle, n, temperature, n)) round(n);
  if (viable.empty()) {
    throw Error(ErrorCode::NoViableCandidate, "all " + std::to_string(trace.candidates.size()) +
                                                  " coarse candidates failed extraction");
  }

  const Ranking ranking = rank_candidates(viable, constraint, ctx.ranker);
  for (std::size_t i = 0; i < viable.size(); ++i) trace.candidates[viable_slot[i]].score = ranking.scores[i];
  trace.chosen = trace.candidates[viable_slot[ranking.best]].index;
  trace.coarse = viable[ranking.best];
  return viable[ranking.best];
}

Layout refine_cot(const Layout& coarse, const std::vector<Layout>& exemplars, const ConstraintSpec& constraint,
                  const PipelineContext& ctx, RefinementTrace& trace) {
  Layout current = coarse;
  const TaskKind family = family_of(constraint.kind());
  const double temperature = ctx.generation.cot_temperature;
  for (int stage = 1; stage <= ctx.generation.stages; ++stage) {
    const PromptBundle bundle =
        build_stage_prompt(*ctx.catalog, stage, family, exemplars, current, constraint, ctx.prompt);
    StageRecord rec;
    rec.stage = stage;
    rec.provenance = bundle.provenance;
    for (std::size_t attempt = 0; attempt < 2 && !rec.parsed; ++attempt) {
      if (attempt > 0 && !ctx.gateway->can_serve(bundle, 1, temperature, attempt)) break;
      rec.responses.push_back(ctx.gateway->complete(bundle, 1, temperature, attempt).front());
      std::string failure;
      Layout l = extracted_or_none(extract_layout(rec.responses.back(), ctx.prompt.vocabulary, constraint.canvas()),
                                   failure);
      if (failure.empty()) {
        l.id = trace.item_id;
        rec.parsed = std::move(l);
        rec.failure.clear();
      } else {
        rec.failure = failure;
      }
    }
    if (rec.parsed) {
      current = *rec.parsed;
    } else {
      rec.fallback = true;
    }
    trace.stages.push_back(std::move(rec));
  }
  return current;
}

RefinementTrace run_item(const LayoutRecord& record, TaskKind task, const PipelineContext& ctx,
                         const std::string& run_id) {
  RefinementTrace trace;
  trace.run_id = run_id;
  trace.item_id = record.id;
  trace.seed = ctx.ablation.seed;
  trace.random_exemplars = ctx.ablation.no_rag;
  try {
    const ConstraintSpec constraint = constraint_for_record(record, task);
    trace.constraint = constraint_to_json(constraint);
    const Layout query = retrieval_query(record.normalized, constraint, ctx);
    const std::size_t k_cot = ctx.ablation.no_cot ? 0 : ctx.generation.k_cot;
    const auto exemplars = select_exemplars(query, record.id, std::max(ctx.generation.k_coarse, k_cot), ctx);
    const std::vector<Layout> coarse_ex(exemplars.begin(),
                                        exemplars.begin() + std::min(ctx.generation.k_coarse, exemplars.size()));
    const std::vector<Layout> cot_ex(exemplars.begin(), exemplars.begin() + std::min(k_cot, exemplars.size()));
    for (const auto& e : coarse_ex) trace.coarse_exemplar_ids.push_back(e.id);
    for (const auto& e : cot_ex) trace.cot_exemplar_ids.push_back(e.id);

    const Layout coarse = generate_coarse(coarse_ex, constraint, ctx, trace);
    trace.final_layout = ctx.ablation.no_cot || ctx.generation.stages == 0
                             ? coarse
                             : refine_cot(coarse, cot_ex, constraint, ctx, trace);
  } catch (const Error& e) {
    trace.error = e.what();
  }
  return trace;
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& config_dir) {
  static const std::set<std::string> kKeys = {"task_family", "dataset", "index",   "area_stats", "templates",
                                              "backend",     "retrieval", "generation", "ranker",  "ablation",
                                              "metrics",     "output_dir", "limit"};
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "run config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorCode::ConfigError, "unknown run config key '" + key + "'");
  }
  RunConfig c;
  c.config_dir = config_dir;
  try {
    c.task = task_kind_from_string(j.value("task_family", std::string("content_aware")));
    const json& ds = j.at("dataset");
    c.records = resolve(config_dir, ds.at("records").get<std::string>());
    c.manifest = ds.value("manifest", c.manifest);
    if (const auto p = resolve(config_dir, c.manifest); std::filesystem::is_regular_file(p)) c.manifest = p.string();
    c.query_split = ds.value("query_split", c.query_split);
    c.database_split = ds.value("database_split", c.database_split);
    if (j.contains("index")) c.index = resolve(config_dir, j["index"].get<std::string>());
    if (j.contains("area_stats")) c.area_stats = resolve(config_dir, j["area_stats"].get<std::string>());
    if (j.contains("templates")) c.templates = resolve(config_dir, j["templates"].get<std::string>());
    if (j.contains("backend")) c.backend = backend_config_from_json(j["backend"], config_dir);
    if (j.contains("retrieval")) {
      const json& r = j["retrieval"];
      c.generation.k_coarse = r.value("k_coarse", c.generation.k_coarse);
      c.generation.k_cot = r.value("k_cot", c.generation.k_cot);
      c.generation.ltsim_scale = r.value("scale", c.generation.ltsim_scale);
      c.retrieval_threads = r.value("threads", c.retrieval_threads);
      if (r.contains("weights")) {
        c.weights.geometric = r["weights"].value("geometric", c.weights.geometric);
        c.weights.label = r["weights"].value("label", c.weights.label);
      }
    }
    if (j.contains("generation")) {
      const json& g = j["generation"];
      c.generation.n = g.value("n", c.generation.n);
      c.generation.stages = g.value("stages", c.generation.stages);
      c.generation.coarse_temperature = g.value("coarse_temperature", c.generation.coarse_temperature);
      c.generation.cot_temperature = g.value("cot_temperature", c.generation.cot_temperature);
    }
    if (j.contains("ranker")) {
      const json& r = j["ranker"];
      c.ranker.align = r.value("align", c.ranker.align);
      c.ranker.overlap = r.value("overlap", c.ranker.overlap);
      c.ranker.constraint = r.value("constraint", c.ranker.constraint);
    }
    if (j.contains("ablation")) {
      const json& a = j["ablation"];
      c.ablation.no_rag = a.value("no_rag", c.ablation.no_rag);
      c.ablation.no_cot = a.value("no_cot", c.ablation.no_cot);
      c.ablation.seed = a.value("seed", c.ablation.seed);
    }
    if (j.contains("metrics")) c.metrics = j["metrics"].get<std::vector<std::string>>();
    c.output_dir = resolve(config_dir, j.value("output_dir", std::string("run")));
    if (j.contains("limit")) c.limit = j["limit"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return run_config_from_json(j, std::filesystem::absolute(path).parent_path());
}

void apply_overrides(RunConfig& c, const RunOverrides& o) {
  if (o.mode) c.backend.mode = *o.mode;
  if (o.seed) c.ablation.seed = *o.seed;
  if (o.no_rag) c.ablation.no_rag = *o.no_rag;
  if (o.no_cot) c.ablation.no_cot = *o.no_cot;
  if (o.stages) c.generation.stages = *o.stages;
  if (o.limit) c.limit = *o.limit;
  if (o.output_dir) c.output_dir = *o.output_dir;
}

RunSummary run_task(const RunConfig& config, std::shared_ptr<ChatBackend> backend) {
  const GenerationSettings& gen = config.generation;
  if (gen.k_coarse == 0 || gen.n == 0) throw Error(ErrorCode::ConfigError, "k_coarse and n must be positive");
  if (gen.stages < 0 || gen.stages > 3) throw Error(ErrorCode::ConfigError, "stages must be between 0 and 3");
  config.ranker.validate();
  config.weights.validate();

  const DatasetManifest manifest = resolve_manifest(config.manifest);
  const CanonicalDataset dataset = ingest_file(config.records, manifest);
  const RetrievalIndex index = config.index && std::filesystem::exists(*config.index)
                                   ? load_index(*config.index)
                                   : build_index(dataset, config.database_split, config.weights);
  AreaStats stats;
  if (config.area_stats) {
    std::ifstream in(*config.area_stats);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + config.area_stats->string());
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaError, config.area_stats->string() + ": " + e.what());
    }
    stats = area_stats_from_json(j);
  } else {
    stats = compute_area_stats(dataset, config.database_split);
  }
  const TemplateCatalog catalog = config.templates ? TemplateCatalog::load(*config.templates) : TemplateCatalog::builtin();
  const Gateway gateway(apply_environment(config.backend), std::move(backend));

  PipelineContext ctx;
  ctx.index = &index;
  ctx.catalog = &catalog;
  ctx.gateway = &gateway;
  ctx.prompt = prompt_context(manifest);
  ctx.generation = gen;
  ctx.ranker = config.ranker;
  ctx.ablation = config.ablation;
  ctx.area_stats = stats;

  const json identity{{"task", to_string(config.task)},
                      {"manifest", manifest.name},
                      {"splits", {config.query_split, config.database_split}},
                      {"model", config.backend.model},
                      {"k", {gen.k_coarse, gen.k_cot}},
                      {"n", gen.n},
                      {"stages", gen.stages},
                      {"temperatures", {gen.coarse_temperature, gen.cot_temperature}},
                      {"ranker", {config.ranker.align, config.ranker.overlap, config.ranker.constraint}},
                      {"ablation", {config.ablation.no_rag, config.ablation.no_cot, config.ablation.seed}}};
  const std::string run_id = sha256_hex(identity.dump()).substr(0, 16);

  auto items = dataset.split(config.query_split);
  if (items.empty()) throw Error(ErrorCode::EmptySplit, "split '" + config.query_split + "' is empty");
  if (config.limit && *config.limit < items.size()) items.resize(*config.limit);

  const auto traces_dir = config.output_dir / "traces";
  std::error_code ec;
  std::filesystem::remove_all(traces_dir, ec);
  std::filesystem::create_directories(traces_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + traces_dir.string() + ": " + ec.message());

  std::ofstream log(config.output_dir / "run.log", std::ios::trunc);
  log << timestamp() << " run " << run_id << " task=" << to_string(config.task) << " mode="
      << to_string(gateway.config().mode) << " items=" << items.size() << '\n';

  RunSummary summary;
  summary.output_dir = config.output_dir;
  summary.items = items.size();
  std::string generated;
  std::vector<EvaluationItem> evaluation;
  for (const LayoutRecord* record : items) {
    const RefinementTrace trace = run_item(*record, config.task, ctx, run_id);
    write_file(traces_dir / (record->id + ".json"), trace_to_json(trace).dump(2) + "\n");
    json line{{"id", record->id}};
    if (trace.final_layout) {
      line["status"] = "ok";
      line.update(layout_to_json(*trace.final_layout));
      EvaluationItem item;
      item.generated = *trace.final_layout;
      if (!record->pixel.empty()) item.reference = record->pixel;
      if (config.task == TaskKind::ContentAware) {
        if (record->saliency) item.saliency = load_raster(dataset.resolve(*record->saliency));
        if (record->gradient) item.gradient = load_raster(dataset.resolve(*record->gradient));
      }
      evaluation.push_back(std::move(item));
      log << timestamp() << " item " << record->id << " ok\n";
    } else {
      ++summary.failures;
      line["status"] = "error";
      line["error"] = trace.error;
      log << timestamp() << " item " << record->id << " failed: " << trace.error << '\n';
    }
    generated += line.dump() + "\n";
  }
  write_file(config.output_dir / "generated.jsonl", generated);

  EvaluationOptions eval;
  eval.task = config.task;
  eval.metrics = config.metrics;
  eval.area_stats = stats;
  summary.report = evaluate_population(evaluation, eval);
  write_file(config.output_dir / "metrics.tsv", format_tsv(summary.report));
  log << timestamp() << " done failures=" << summary.failures << '\n';
  return summary;
}

}  // namespace layoutcot
