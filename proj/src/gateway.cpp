#include "layoutcot/gateway.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "layoutcot/error.hpp"
#include "layoutcot/hash.hpp"

namespace layoutcot {

using nlohmann::json;

const char* to_string(BackendMode mode) {
  switch (mode) {
    case BackendMode::Live: return "live";
    case BackendMode::Record: return "record";
    case BackendMode::Replay: return "replay";
  }
  return "replay";
}

BackendMode backend_mode_from_string(const std::string& token) {
  if (token == "live") return BackendMode::Live;
  if (token == "record") return BackendMode::Record;
  if (token == "replay") return BackendMode::Replay;
  throw Error(ErrorCode::ConfigError, "unknown backend mode '" + token + "'");
}

void BackendConfig::validate() const {
  if (mode != BackendMode::Live && transcript_dir.empty()) {
    throw Error(ErrorCode::ConfigError, std::string(to_string(mode)) + " mode needs a transcript directory");
  }
  if (mode != BackendMode::Replay) {
    if (endpoint.empty()) throw Error(ErrorCode::ConfigError, "live backend needs an endpoint");
    if (api_key.empty()) throw Error(ErrorCode::CredentialMissing, "set LAYOUTCOT_API_KEY for live requests");
  }
  if (fan_out == 0) throw Error(ErrorCode::ConfigError, "fan_out must be at least 1");
}

BackendConfig apply_environment(BackendConfig config) {
  const BackendConfig defaults;
  if (const char* key = std::getenv("LAYOUTCOT_API_KEY"); key && *key) config.api_key = key;
  if (const char* ep = std::getenv("LAYOUTCOT_ENDPOINT"); ep && *ep && config.endpoint.empty()) config.endpoint = ep;
  if (const char* m = std::getenv("LAYOUTCOT_MODEL"); m && *m && config.model == defaults.model) config.model = m;
  return config;
}

BackendConfig backend_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  BackendConfig c;
  try {
    if (j.contains("mode")) c.mode = backend_mode_from_string(j.at("mode").get<std::string>());
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long long>(c.timeout.count())));
    c.retry_limit = j.value("retry_limit", c.retry_limit);
    c.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", static_cast<long long>(c.backoff_base.count())));
    c.fan_out = j.value("fan_out", c.fan_out);
    if (j.contains("transcript_dir")) {
      const std::filesystem::path p = j.at("transcript_dir").get<std::string>();
      c.transcript_dir = p.is_absolute() ? p : base_dir / p;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad backend config: ") + e.what());
  }
  return c;
}

json request_identity(const ChatRequest& r) {
  return json{{"candidate_index", r.candidate_index},
              {"model", r.model},
              {"system", r.system},
              {"temperature", r.temperature},
              {"user", r.user}};
}

std::string transcript_key(const ChatRequest& request) { return sha256_hex(request_identity(request).dump()); }

json transcript_to_json(const Transcript& t) {
  return json{{"key", t.key}, {"request", t.request}, {"response", t.response_text}, {"metadata", t.metadata}};
}

Transcript transcript_from_json(const json& j) {
  try {
    return {j.at("key").get<std::string>(), j.value("request", json::object()), j.at("response").get<std::string>(),
            j.value("metadata", json::object())};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("bad transcript: ") + e.what());
  }
}

TranscriptStore::TranscriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path TranscriptStore::path_for(const std::string& key) const { return dir_ / (key + ".json"); }

bool TranscriptStore::contains(const std::string& key) const { return std::filesystem::exists(path_for(key)); }

std::optional<Transcript> TranscriptStore::load(const std::string& key) const {
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, path_for(key).string() + ": " + e.what());
  }
  return transcript_from_json(j);
}

void TranscriptStore::save(const Transcript& transcript) const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  const auto target = path_for(transcript.key);
  auto tmp = target;
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << transcript_to_json(transcript).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::vector<std::string> TranscriptStore::keys() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

HttpChatBackend::HttpChatBackend(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::ConfigError, "endpoint needs a scheme: " + endpoint);
  const auto slash = endpoint.find('/', scheme + 3);
  origin_ = endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint.substr(slash);
}

ChatResponse HttpChatBackend::send(const ChatRequest& request) {
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const json body{{"model", request.model},
                  {"temperature", request.temperature},
                  {"max_tokens", request.max_tokens},
                  {"messages",
                   {{{"role", "system"}, {"content", request.system}}, {{"role", "user"}, {"content", request.user}}}}};
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
  const auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::TransportError, origin_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(ErrorCode::TransportError, origin_ + " answered HTTP " + std::to_string(res->status));
  }
  try {
    const json j = json::parse(res->body);
    ChatResponse out;
    out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      out.prompt_tokens = j["usage"].value("prompt_tokens", std::size_t{0});
      out.completion_tokens = j["usage"].value("completion_tokens", std::size_t{0});
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::TransportError, std::string("unexpected response body: ") + e.what());
  }
}

Gateway::Gateway(BackendConfig config, std::shared_ptr<ChatBackend> backend)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (config_.mode != BackendMode::Replay && !backend_) {
    config_.validate();
    backend_ = std::make_shared<HttpChatBackend>(config_.endpoint, config_.api_key, config_.timeout);
  }
  if (config_.mode != BackendMode::Live && config_.transcript_dir.empty()) {
    throw Error(ErrorCode::ConfigError, std::string(to_string(config_.mode)) + " mode needs a transcript directory");
  }
  if (!config_.transcript_dir.empty()) store_.emplace(config_.transcript_dir);
}

ChatRequest Gateway::make_request(const PromptBundle& bundle, double temperature, std::size_t candidate_index) const {
  return {bundle.system, bundle.user, config_.model, temperature, config_.max_tokens, candidate_index};
}

bool Gateway::can_serve(const PromptBundle& bundle, std::size_t n, double temperature,
                        std::size_t first_index) const {
  if (config_.mode != BackendMode::Replay) return true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!store_->contains(transcript_key(make_request(bundle, temperature, first_index + i)))) return false;
  }
  return true;
}

std::string Gateway::complete_one(const ChatRequest& request) const {
  std::size_t attempt = 0;
  while (true) {
    try {
      const ChatResponse response = backend_->send(request);
      if (config_.mode == BackendMode::Record) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        store_->save({transcript_key(request), request_identity(request), response.text,
                      json{{"recorded_at", stamp},
                           {"prompt_tokens", response.prompt_tokens},
                           {"completion_tokens", response.completion_tokens}}});
      }
      return response.text;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TransportError || attempt >= config_.retry_limit) throw;
      const std::chrono::milliseconds delay =
          std::min<std::chrono::milliseconds>(config_.backoff_cap, config_.backoff_base * (1LL << std::min<std::size_t>(attempt, 30)));
      ++attempt;
      sleeper_(delay);
    }
  }
}

std::vector<std::string> Gateway::complete(const PromptBundle& bundle, std::size_t n, double temperature,
                                           std::size_t first_index) const {
  if (n == 0) throw Error(ErrorCode::ConfigError, "need at least one completion");
  std::vector<ChatRequest> requests;
  for (std::size_t i = 0; i < n; ++i) requests.push_back(make_request(bundle, temperature, first_index + i));

  std::vector<std::string> out(n);
  if (config_.mode == BackendMode::Replay) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string key = transcript_key(requests[i]);
      auto t = store_->load(key);
      if (!t) {
        throw Error(ErrorCode::ReplayMiss, "no transcript " + key + " (candidate " +
                                               std::to_string(requests[i].candidate_index) + ")");
      }
      out[i] = std::move(t->response_text);
    }
    return out;
  }

  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = complete_one(requests[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t threads = std::min(n, config_.fan_out);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Extraction extract_layout(const std::string& response, const std::vector<std::string>& vocabulary,
                          const std::optional<Canvas>& fallback_canvas) {
  ParseOptions options;
  options.vocabulary = vocabulary;
  options.fallback_canvas = fallback_canvas;
  try {
    ParsedLayout parsed = parse_html(response, options);
    if (parsed.layout.elements.empty()) return ExtractionFailure{response, "no elements in response"};
    return parsed;
  } catch (const Error& e) {
    return ExtractionFailure{response, e.what()};
  }
}

}  // namespace layoutcot
