#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "layoutcot/html.hpp"
#include "layoutcot/prompt.hpp"

namespace layoutcot {

enum class BackendMode { Live, Record, Replay };

const char* to_string(BackendMode mode);
BackendMode backend_mode_from_string(const std::string& token);

struct BackendConfig {
  BackendMode mode = BackendMode::Replay;
  // Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
  std::string endpoint;
  std::string model = "gpt-4";
  std::string api_key;
  double temperature = 0.7;
  int max_tokens = 2048;
  std::chrono::milliseconds timeout{120000};
  std::size_t retry_limit = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{16000};
  std::filesystem::path transcript_dir;
  // Upper bound on requests in flight for one complete() call.
  std::size_t fan_out = 4;

  /// Replay needs transcript_dir; live and record need endpoint and api_key
  /// (CredentialMissing) and record also needs transcript_dir.
  void validate() const;
};

/// Fills endpoint, model and api_key from LAYOUTCOT_ENDPOINT,
/// LAYOUTCOT_MODEL and LAYOUTCOT_API_KEY. The api key always comes from the
/// environment when set; endpoint and model only when `config` leaves them at
/// their defaults.
BackendConfig apply_environment(BackendConfig config);

/// Reads the "backend" object of a run config. Relative transcript paths
/// resolve against `base_dir`.
BackendConfig backend_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct ChatRequest {
  std::string system;
  std::string user;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 2048;
  std::size_t candidate_index = 0;
};

struct ChatResponse {
  std::string text;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

/// Canonical JSON of the fields that identify a request (system, user,
/// model, temperature, candidate index).
nlohmann::json request_identity(const ChatRequest& request);
/// SHA-256 hex of the compact canonical identity JSON.
std::string transcript_key(const ChatRequest& request);

struct Transcript {
  std::string key;
  nlohmann::json request;
  std::string response_text;
  nlohmann::json metadata;
};

nlohmann::json transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& j);

/// One JSON file per key. Writes go through a temporary file and a rename,
/// so readers never see a partial transcript.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir);

  std::filesystem::path path_for(const std::string& key) const;
  bool contains(const std::string& key) const;
  std::optional<Transcript> load(const std::string& key) const;
  void save(const Transcript& transcript) const;
  /// Keys of every transcript file in the directory, sorted.
  std::vector<std::string> keys() const;

 private:
  std::filesystem::path dir_;
};

/// Transport for one request. Implementations throw Error(TransportError)
/// for failures worth retrying.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

/// Generic chat-completions over HTTP(S).
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout);
  ChatResponse send(const ChatRequest& request) override;

 private:
  std::string origin_;
  std::string path_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

class Gateway {
 public:
  /// Live and record modes use `backend`, or an HttpChatBackend built from
  /// the config when it is null. Replay never touches a backend.
  explicit Gateway(BackendConfig config, std::shared_ptr<ChatBackend> backend = nullptr);

  const BackendConfig& config() const { return config_; }

  /// n completions of one bundle for candidate indices first_index ..
  /// first_index + n - 1, returned in index order. Throws TransportError
  /// after retries, ReplayMiss naming the first absent key.
  std::vector<std::string> complete(const PromptBundle& bundle, std::size_t n, double temperature,
                                    std::size_t first_index = 0) const;

  /// False only in replay mode when some of the n transcripts are absent.
  bool can_serve(const PromptBundle& bundle, std::size_t n, double temperature, std::size_t first_index = 0) const;

  ChatRequest make_request(const PromptBundle& bundle, double temperature, std::size_t candidate_index) const;

  /// Replaces the sleep between retries (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }

 private:
  std::string complete_one(const ChatRequest& request) const;

  BackendConfig config_;
  std::shared_ptr<ChatBackend> backend_;
  std::optional<TranscriptStore> store_;
  std::function<void(std::chrono::milliseconds)> sleeper_;
};

struct ExtractionFailure {
  std::string raw;
  std::string reason;
};

using Extraction = std::variant<ParsedLayout, ExtractionFailure>;

/// Lenient parse of an LLM response. Failures are returned, not thrown.
Extraction extract_layout(const std::string& response, const std::vector<std::string>& vocabulary,
                          const std::optional<Canvas>& fallback_canvas = std::nullopt);

}  // namespace layoutcot
