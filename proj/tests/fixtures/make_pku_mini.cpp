// Regenerates tests/fixtures/pku_mini: a small poster dataset, its rasters,
// a replay run config, and transcripts recorded from the scripted backend.
//
//   make_pku_mini <fixture-dir>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "layoutcot/dataset.hpp"
#include "layoutcot/error.hpp"
#include "layoutcot/pipeline.hpp"
#include "layoutcot/raster.hpp"
#include "scripted_backend.hpp"

namespace fs = std::filesystem;
namespace lc = layoutcot;
using nlohmann::json;

namespace {

constexpr double kW = 513, kH = 750;

lc::SaliencyRaster blob_raster(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_real_distribution<double> u(0.2, 0.8);
  const double cx = u(rng) * w, cy = u(rng) * h, r = 0.25 * w;
  lc::SaliencyRaster s{w, h, std::vector<double>(w * h)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy) / r;
      s.values[y * w + x] = std::round(255.0 * std::exp(-d * d)) / 255.0;
    }
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_pku_mini <fixture-dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  try {
    fs::remove_all(dir / "transcripts");
    fs::create_directories(dir / "saliency");
    fs::create_directories(dir / "gradient");

    std::mt19937_64 rng(20240611);
    std::ofstream records(dir / "records.jsonl", std::ios::trunc);
    const std::vector<std::vector<std::string>> shapes = {{"text", "text", "logo", "underlay"},
                                                          {"text", "logo"},
                                                          {"text", "text", "text", "underlay"},
                                                          {"logo", "text", "underlay", "underlay"},
                                                          {"text"}};
    for (int i = 0; i < 30; ++i) {
      lc::LayoutRecord r;
      r.id = "train_" + std::string(i < 10 ? "0" : "") + std::to_string(i);
      r.split = "train";
      r.pixel = scripted::random_layout(rng, kW, kH, shapes[i % shapes.size()]);
      records << lc::record_to_json(r).dump() << '\n';
    }
    for (int i = 0; i < 5; ++i) {
      lc::LayoutRecord r;
      r.id = "test_" + std::to_string(i);
      r.split = "test";
      r.pixel.canvas = {kW, kH, std::nullopt};
      r.saliency = "saliency/" + r.id + ".pgm";
      r.gradient = "gradient/" + r.id + ".pgm";
      json cats = json::object();
      for (const auto& label : shapes[i]) cats[label] = cats.value(label, 0) + 1;
      r.constraints = json{{"kind", "content_aware"}, {"categories", cats}};
      lc::save_raster(blob_raster(rng, 51, 75), dir / *r.saliency);
      lc::save_raster(blob_raster(rng, 51, 75), dir / *r.gradient);
      records << lc::record_to_json(r).dump() << '\n';
    }
    records.close();

    const json config{{"task_family", "content_aware"},
                      {"dataset",
                       {{"records", "records.jsonl"},
                        {"manifest", "pku"},
                        {"query_split", "test"},
                        {"database_split", "train"}}},
                      {"backend", {{"mode", "replay"}, {"model", "gpt-4"}, {"transcript_dir", "transcripts"}}},
                      {"retrieval", {{"k_coarse", 10}, {"k_cot", 4}}},
                      {"generation", {{"n", 10}, {"stages", 3}}},
                      {"ablation", {{"seed", 7}}},
                      {"output_dir", "run"}};
    std::ofstream(dir / "run.json", std::ios::trunc) << config.dump(2) << '\n';

    // Record: the third stage-2 request is refused once, so one item
    // exercises the stage retry.
    std::size_t stage2 = 0;
    auto backend = std::make_shared<scripted::ScriptedBackend>(
        [&stage2](const lc::ChatRequest& r, std::size_t) -> std::optional<std::string> {
          if (scripted::stage_of(r) == 2 && r.candidate_index == 0 && ++stage2 == 3) {
            return "Sorry, I cannot help with that.";
          }
          return std::nullopt;
        });
    auto cfg = lc::load_run_config(dir / "run.json");
    cfg.backend.mode = lc::BackendMode::Record;
    cfg.output_dir = fs::temp_directory_path() / "layoutcot_make_pku_mini";
    const auto summary = lc::run_task(cfg, backend);
    fs::remove_all(cfg.output_dir);
    std::cout << "recorded " << backend->calls() << " transcripts for " << summary.items << " items ("
              << summary.failures << " failed)\n";
    return summary.failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
