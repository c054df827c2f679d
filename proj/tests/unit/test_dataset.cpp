#include <gtest/gtest.h>

#include <sstream>

#include "layoutcot/dataset.hpp"
#include "layoutcot/error.hpp"

namespace lc = layoutcot;

namespace {

const char* kRecords =
    R"({"id":"a","split":"train","canvas":{"w":100,"h":200},"elements":[{"label":"text","bbox":[10,20,50,40]}]}
{"id":"b","split":"train","canvas":{"w":100,"h":100},"elements":[{"label":"logo","bbox":[0,0,10,10]},{"label":"text","bbox":[0,0,20,50]}]}

{"id":"c","split":"test","canvas":{"w":100,"h":100},"elements":[{"label":"banner","bbox":[0,0,10,10]}]}
)";

lc::CanonicalDataset load(bool strict = false) {
  std::istringstream in(kRecords);
  return lc::ingest(in, lc::builtin_manifest("pku"), {strict});
}

}  // namespace

TEST(Dataset, BuiltinManifests) {
  EXPECT_EQ(lc::builtin_manifest("pku").vocabulary, (std::vector<std::string>{"text", "logo", "underlay"}));
  EXPECT_EQ(lc::builtin_manifest("rico").vocabulary.size(), 25u);
  EXPECT_EQ(lc::builtin_manifest("publaynet").task_kind, lc::TaskKind::ConstraintExplicit);
  EXPECT_THROW(lc::builtin_manifest("nope"), lc::Error);
  const auto m = lc::builtin_manifest("cgl");
  EXPECT_EQ(lc::manifest_from_json(lc::manifest_to_json(m)).vocabulary, m.vocabulary);
}

TEST(Dataset, IngestNormalizesAndRejectsUnknownLabels) {
  const auto ds = load();
  ASSERT_EQ(ds.records.size(), 2u);
  EXPECT_EQ(ds.records[0].normalized.elements[0].bbox, (lc::BBox{0.1, 0.1, 0.5, 0.2}));
  EXPECT_EQ(ds.split("train").size(), 2u);
  EXPECT_EQ(ds.find("c"), nullptr);
  // One rejection plus split-size mismatches against the full dataset.
  EXPECT_FALSE(ds.warnings.empty());
  EXPECT_NE(ds.warnings.front().find("banner"), std::string::npos);
}

TEST(Dataset, StrictIngestThrows) {
  try {
    load(true);
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::VocabularyError);
  }
}

TEST(Dataset, SchemaErrors) {
  for (const std::string line : {R"({"split":"x","canvas":{"w":1,"h":1},"elements":[]})",
                                 R"({"id":"x","canvas":{"w":0,"h":1},"elements":[]})",
                                 R"({"id":"x","canvas":{"w":1,"h":1},"elements":[{"label":"text"}]})",
                                 "not json"}) {
    std::istringstream in(line);
    EXPECT_THROW(lc::ingest(in, lc::builtin_manifest("pku")), lc::Error) << line;
  }
}

TEST(Dataset, RecordJsonRoundTrip) {
  const auto ds = load();
  for (const auto& r : ds.records) {
    const auto back = lc::record_from_json(lc::record_to_json(r));
    EXPECT_EQ(back.pixel, r.pixel);
    EXPECT_EQ(back.normalized, r.normalized);
  }
  std::ostringstream out;
  lc::export_jsonl(ds, out);
  std::istringstream in(out.str());
  EXPECT_EQ(lc::ingest(in, lc::builtin_manifest("pku")).records.size(), 2u);
}

TEST(Dataset, AreaStats) {
  const auto stats = lc::compute_area_stats(load(), "train");
  // text: 0.5*0.2 = 0.1 and 0.2*0.5 = 0.1; logo: 0.01.
  EXPECT_NEAR(stats.mean_area.at("text"), 0.1, 1e-15);
  EXPECT_NEAR(stats.mean_area.at("logo"), 0.01, 1e-15);
  EXPECT_EQ(stats.mean_area.count("underlay"), 0u);
  EXPECT_EQ(lc::area_stats_from_json(lc::area_stats_to_json(stats)), stats);
}

TEST(Dataset, TaskKindTokens) {
  for (auto k : {lc::TaskKind::ContentAware, lc::TaskKind::ConstraintExplicit, lc::TaskKind::TextToLayout}) {
    EXPECT_EQ(lc::task_kind_from_string(lc::to_string(k)), k);
  }
}
