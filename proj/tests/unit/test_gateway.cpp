#include <gtest/gtest.h>

#include <httplib.h>

#include <filesystem>
#include <mutex>
#include <thread>

#include "layoutcot/error.hpp"
#include "layoutcot/gateway.hpp"
#include "layoutcot/hash.hpp"

namespace fs = std::filesystem;
namespace lc = layoutcot;
using nlohmann::json;

namespace {

// Echoes "<user>#<candidate>" and optionally fails the first few calls.
class EchoBackend : public lc::ChatBackend {
 public:
  explicit EchoBackend(int failures = 0) : failures_(failures) {}
  lc::ChatResponse send(const lc::ChatRequest& r) override {
    std::lock_guard lock(mu_);
    ++calls;
    if (failures_ > 0) {
      --failures_;
      throw lc::Error(lc::ErrorCode::TransportError, "flaky");
    }
    return {r.user + "#" + std::to_string(r.candidate_index), 3, 4};
  }
  int calls = 0;

 private:
  std::mutex mu_;
  int failures_;
};

class GatewayTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("layoutcot_gw_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  lc::BackendConfig config(lc::BackendMode mode) const {
    lc::BackendConfig c;
    c.mode = mode;
    c.transcript_dir = dir_;
    return c;
  }

  fs::path dir_;
  lc::PromptBundle bundle_{"sys", "usr", {}};
};

}  // namespace

TEST(Transcript, KeyIsStableAndFieldSensitive) {
  lc::ChatRequest r{"s", "u", "gpt-4", 0.7, 2048, 3};
  const auto key = lc::transcript_key(r);
  EXPECT_EQ(key.size(), 64u);
  EXPECT_EQ(key, lc::transcript_key(r));
  auto other = r;
  other.max_tokens = 10;  // not part of the identity
  EXPECT_EQ(lc::transcript_key(other), key);
  for (auto change : {+[](lc::ChatRequest& x) { x.system += "!"; }, +[](lc::ChatRequest& x) { x.user += "!"; },
                      +[](lc::ChatRequest& x) { x.model = "m"; }, +[](lc::ChatRequest& x) { x.temperature = 0; },
                      +[](lc::ChatRequest& x) { x.candidate_index = 4; }}) {
    auto y = r;
    change(y);
    EXPECT_NE(lc::transcript_key(y), key);
  }
  EXPECT_EQ(lc::request_identity(r).dump(),
            R"({"candidate_index":3,"model":"gpt-4","system":"s","temperature":0.7,"user":"u"})");
}

TEST_F(GatewayTest, RecordThenReplay) {
  auto backend = std::make_shared<EchoBackend>();
  lc::Gateway rec(config(lc::BackendMode::Record), backend);
  const auto recorded = rec.complete(bundle_, 6, 0.7);
  ASSERT_EQ(recorded.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(recorded[i], "usr#" + std::to_string(i));

  const lc::TranscriptStore store(dir_);
  EXPECT_EQ(store.keys().size(), 6u);
  for (const auto& key : store.keys()) {
    const auto t = store.load(key);
    ASSERT_TRUE(t);
    EXPECT_EQ(lc::sha256_hex(t->request.dump()), key);
    EXPECT_TRUE(t->metadata.contains("recorded_at"));
  }

  lc::Gateway replay(config(lc::BackendMode::Replay));
  EXPECT_EQ(replay.complete(bundle_, 6, 0.7), recorded);
  EXPECT_EQ(replay.complete(bundle_, 2, 0.7, 4), (std::vector<std::string>{"usr#4", "usr#5"}));
  EXPECT_TRUE(replay.can_serve(bundle_, 6, 0.7));
  EXPECT_FALSE(replay.can_serve(bundle_, 7, 0.7));
}

TEST_F(GatewayTest, ReplayMissNamesKey) {
  lc::Gateway replay(config(lc::BackendMode::Replay));
  const auto key = lc::transcript_key(replay.make_request(bundle_, 0.0, 0));
  try {
    replay.complete(bundle_, 1, 0.0);
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::ReplayMiss);
    EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
  }
}

TEST_F(GatewayTest, RetriesWithCappedBackoff) {
  auto cfg = config(lc::BackendMode::Record);
  cfg.retry_limit = 5;
  cfg.backoff_base = std::chrono::milliseconds(100);
  cfg.backoff_cap = std::chrono::milliseconds(300);
  cfg.fan_out = 1;
  auto backend = std::make_shared<EchoBackend>(4);
  lc::Gateway gw(cfg, backend);
  std::vector<long> delays;
  gw.set_sleeper([&](std::chrono::milliseconds d) { delays.push_back(d.count()); });
  EXPECT_EQ(gw.complete(bundle_, 1, 0.0), (std::vector<std::string>{"usr#0"}));
  EXPECT_EQ(delays, (std::vector<long>{100, 200, 300, 300}));
  EXPECT_EQ(backend->calls, 5);
}

TEST_F(GatewayTest, GivesUpAfterRetryLimit) {
  auto cfg = config(lc::BackendMode::Live);
  cfg.retry_limit = 2;
  auto backend = std::make_shared<EchoBackend>(10);
  lc::Gateway gw(cfg, backend);
  gw.set_sleeper([](std::chrono::milliseconds) {});
  try {
    gw.complete(bundle_, 1, 0.0);
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::TransportError);
  }
  EXPECT_EQ(backend->calls, 3);
}

TEST_F(GatewayTest, FanOutKeepsIndexOrder) {
  auto cfg = config(lc::BackendMode::Live);
  cfg.fan_out = 8;
  lc::Gateway gw(cfg, std::make_shared<EchoBackend>());
  const auto out = gw.complete(bundle_, 32, 0.0, 100);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], "usr#" + std::to_string(100 + i));
  EXPECT_FALSE(fs::exists(dir_));  // live mode never writes
}

TEST_F(GatewayTest, ConfigValidation) {
  auto cfg = config(lc::BackendMode::Record);
  cfg.endpoint = "http://localhost:1/v1/chat/completions";
  try {
    lc::Gateway gw(cfg);
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::CredentialMissing);
  }
  cfg = config(lc::BackendMode::Replay);
  cfg.transcript_dir.clear();
  EXPECT_THROW(lc::Gateway{cfg}, lc::Error);
  EXPECT_EQ(lc::backend_mode_from_string("record"), lc::BackendMode::Record);
  EXPECT_THROW(lc::backend_mode_from_string("dry"), lc::Error);
}

TEST(GatewayConfig, FromJsonAndEnvironment) {
  const auto cfg = lc::backend_config_from_json(
      json{{"mode", "live"}, {"endpoint", "http://x/v1/chat/completions"}, {"transcript_dir", "t"}, {"fan_out", 2}},
      "/base");
  EXPECT_EQ(cfg.mode, lc::BackendMode::Live);
  EXPECT_EQ(cfg.transcript_dir, fs::path("/base/t"));
  EXPECT_EQ(cfg.fan_out, 2u);
  ::setenv("LAYOUTCOT_API_KEY", "sk-test", 1);
  ::setenv("LAYOUTCOT_MODEL", "other", 1);
  const auto env = lc::apply_environment(cfg);
  ::unsetenv("LAYOUTCOT_API_KEY");
  ::unsetenv("LAYOUTCOT_MODEL");
  EXPECT_EQ(env.api_key, "sk-test");
  EXPECT_EQ(env.model, "other");
  EXPECT_EQ(env.endpoint, cfg.endpoint);
}

TEST(HttpBackend, TalksChatCompletions) {
  httplib::Server server;
  json seen;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    seen["auth"] = req.get_header_value("Authorization");
    res.set_content(json{{"choices", {{{"message", {{"content", "hello"}}}}}},
                         {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 2}}}}
                        .dump(),
                    "application/json");
  });
  server.Post("/fail", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  lc::HttpChatBackend ok(base + "/v1/chat/completions", "sk-1", std::chrono::milliseconds(5000));
  const auto r = ok.send({"sys", "usr", "gpt-4", 0.5, 100, 0});
  EXPECT_EQ(r.text, "hello");
  EXPECT_EQ(r.prompt_tokens, 7u);
  EXPECT_EQ(seen["model"], "gpt-4");
  EXPECT_EQ(seen["messages"][0]["role"], "system");
  EXPECT_EQ(seen["messages"][1]["content"], "usr");
  EXPECT_EQ(seen["auth"], "Bearer sk-1");

  lc::HttpChatBackend bad(base + "/fail", "sk-1", std::chrono::milliseconds(5000));
  try {
    bad.send({"s", "u", "m", 0, 1, 0});
    ADD_FAILURE();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::TransportError);
  }
  server.stop();
  t.join();
}

TEST(Extraction, LenientAndFailures) {
  const auto ok = lc::extract_layout(
      "Here:\n```html\n<div class=\"canvas\" style=\"width:10px; height:10px\"></div>"
      "<div class=\"logo\" style=\"left:1px; top:1px; width:2px; height:2px\"></div>\n```",
      {"text", "logo"});
  ASSERT_TRUE(std::holds_alternative<lc::ParsedLayout>(ok));
  EXPECT_EQ(std::get<lc::ParsedLayout>(ok).layout.elements.size(), 1u);

  for (const std::string bad : {"I cannot do that.",
                                "<div class=\"canvas\" style=\"width:10px; height:10px\"></div>",
                                "<div class=\"banner\" style=\"left:1px; top:1px; width:2px; height:2px\"></div>"}) {
    const auto r = lc::extract_layout(bad, {"text", "logo"}, lc::Canvas{10, 10, std::nullopt});
    ASSERT_TRUE(std::holds_alternative<lc::ExtractionFailure>(r)) << bad;
    EXPECT_EQ(std::get<lc::ExtractionFailure>(r).raw, bad);
  }
}
