#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "layoutcot/error.hpp"
#include "layoutcot/retrieval.hpp"
#include "oracles.hpp"

namespace lc = layoutcot;

namespace {

lc::CanonicalDataset synthetic(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::ostringstream s;
  for (std::size_t i = 0; i < n; ++i) {
    lc::LayoutRecord r;
    r.id = "r" + std::to_string(1000 + i);
    r.split = "train";
    r.pixel = oracle::random_pixel_layout(rng, {"text", "logo", "underlay"}, 4, 100, 100);
    s << lc::record_to_json(r).dump() << '\n';
  }
  std::istringstream in(s.str());
  return lc::ingest(in, lc::builtin_manifest("pku"));
}

}  // namespace

TEST(Retrieval, MatchesBruteForceIncludingTies) {
  auto ds = synthetic(120, 3);
  // Duplicate geometry under later ids so ties occur.
  for (int i = 0; i < 5; ++i) {
    auto copy = ds.records[static_cast<std::size_t>(i)];
    copy.id = "dup" + std::to_string(i);
    ds.records.push_back(copy);
  }
  const auto index = lc::build_index(ds, "train");
  std::mt19937_64 rng(4);
  for (int q = 0; q < 20; ++q) {
    auto query = oracle::random_pixel_layout(rng, {"text", "logo", "underlay"}, 4, 100, 100);
    if (q < 5) query = ds.records[static_cast<std::size_t>(q)].pixel;
    for (std::size_t k : {1u, 4u, 10u}) {
      lc::RetrievalOptions opts;
      opts.k = k;
      EXPECT_EQ(lc::topk_retrieve(query, index, opts), oracle::brute_force_topk(query, index, k));
    }
  }
}

TEST(Retrieval, SelfSimilarityAndExclusion) {
  const auto ds = synthetic(30, 5);
  const auto index = lc::build_index(ds, "train");
  const auto& self = ds.records[7];
  lc::RetrievalOptions opts;
  opts.k = 3;
  auto hits = lc::topk_retrieve(self.pixel, index, opts);
  EXPECT_EQ(hits[0].id, self.id);
  EXPECT_DOUBLE_EQ(hits[0].similarity, 1.0);
  opts.exclude_self = true;
  hits = lc::topk_retrieve(self.pixel, index, opts);
  EXPECT_EQ(hits.size(), 3u);
  for (const auto& h : hits) EXPECT_NE(h.id, self.id);
}

TEST(Retrieval, ThreadCountDoesNotChangeResults) {
  const auto index = lc::build_index(synthetic(200, 6), "train");
  std::mt19937_64 rng(7);
  const auto q = oracle::random_pixel_layout(rng, {"text", "logo"}, 3, 100, 100);
  lc::RetrievalOptions one, many;
  one.threads = 1;
  many.threads = 4;
  one.k = many.k = 25;
  EXPECT_EQ(lc::topk_retrieve(q, index, one), lc::topk_retrieve(q, index, many));
}

TEST(Retrieval, SaveLoadRoundTrip) {
  const auto index = lc::build_index(synthetic(10, 8), "train");
  const auto path = std::filesystem::temp_directory_path() / "layoutcot_index_test.json";
  lc::save_index(index, path);
  EXPECT_EQ(lc::load_index(path), index);
  const auto layout = index.to_layout(index.entries[0]);
  EXPECT_EQ(layout.canvas.width, 100);
  std::filesystem::remove(path);
}

TEST(Retrieval, Errors) {
  lc::CanonicalDataset empty;
  empty.manifest = lc::builtin_manifest("pku");
  try {
    lc::build_index(empty, "train");
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::EmptySplit);
  }
  lc::RetrievalIndex none;
  lc::Layout q;
  q.canvas = {1, 1, std::nullopt};
  q.elements = {{"text", {0, 0, 1, 1}, false}};
  try {
    lc::topk_retrieve(q, none);
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::EmptyIndex);
  }
}

TEST(Retrieval, PseudoQuery) {
  const auto q = lc::pseudo_query({200, 100, std::nullopt}, {"text", "logo"}, lc::AreaStats{{{"text", 0.04}}});
  ASSERT_EQ(q.elements.size(), 2u);
  const auto n = lc::normalize(q);
  EXPECT_NEAR(n.elements[0].bbox.area(), 0.04, 1e-12);
  EXPECT_NEAR(n.elements[1].bbox.area(), 0.05, 1e-12);
  EXPECT_NEAR(n.elements[0].bbox.center_x(), 0.5, 1e-12);
}
