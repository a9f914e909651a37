#ifndef NEGANCHOR_LLM_GATEWAY_HPP
#define NEGANCHOR_LLM_GATEWAY_HPP

#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include "neganchor/error.hpp"
#include "neganchor/http.hpp"

namespace neganchor {

inline constexpr double kDefaultTemperature = 0.0;
inline constexpr int kDefaultMaxTokens = 512;

struct CompletionRequest {
  std::string prompt;
  /// Empty means "the gateway's configured model".
  std::string model;
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
};

struct CompletionOutcome {
  std::string text;
  std::optional<Error> error;

  bool ok() const { return !error.has_value(); }
};

struct CallRecord {
  std::string timestamp;
  std::string prompt_hash;
  std::string model;
  long long latency_ms = 0;
  /// "ok", or the error kind name of this attempt.
  std::string outcome;
  int attempt = 0;
  /// Sleep scheduled after this attempt (0 when no retry follows).
  long long backoff_ms = 0;
};

/// Thread-safe structured call log; optionally mirrored to a JSONL file as
/// {timestamp, prompt_hash, model, latency_ms, outcome, attempt, backoff_ms}.
class CallLog {
 public:
  CallLog() = default;
  explicit CallLog(std::string jsonl_path);

  void append(CallRecord record);
  std::vector<CallRecord> records() const;

 private:
  mutable std::mutex mutex_;
  std::vector<CallRecord> records_;
  std::string path_;
};

/// 64-bit FNV-1a of the prompt, 16 lowercase hex digits.
std::string prompt_hash(std::string_view prompt);

/// Chat-completion front door; every model call in the pipeline goes here.
/// Implementations must tolerate concurrent complete() calls.
class LlmGateway {
 public:
  virtual ~LlmGateway() = default;

  /// Returns the assistant text or throws Error (RateLimited, Transport,
  /// AuthMissing, ...).
  virtual std::string complete(const CompletionRequest& request) = 0;

  /// Same results as calling complete() sequentially, in request order, with
  /// at most `max_in_flight` calls outstanding. Failures stay per item.
  std::vector<CompletionOutcome> complete_batch(std::span<const CompletionRequest> requests,
                                                int max_in_flight);
};

struct ScriptRule {
  enum class Match { Substring, Regex };
  Match match = Match::Substring;
  std::string pattern;
  std::string response;
  /// When set, the rule raises this error instead of answering.
  std::optional<ErrorKind> fail_with;
};

/// Ordered rules, first match wins; `default_response` makes it total.
struct ScriptedBehavior {
  std::vector<ScriptRule> rules;
  std::string default_response;

  /// {"rules": [{"substring"|"regex": ..., "response": ... | "error": kind}],
  ///  "default": ...}
  static ScriptedBehavior from_json_text(const std::string& text);
  static ScriptedBehavior from_file(const std::string& path);
};

/// Offline, deterministic gateway. Holds no transport, so it cannot touch
/// the network.
class ScriptedGateway final : public LlmGateway {
 public:
  explicit ScriptedGateway(ScriptedBehavior behavior, std::shared_ptr<CallLog> log = nullptr);

  std::string complete(const CompletionRequest& request) override;

 private:
  ScriptedBehavior behavior_;
  std::vector<std::optional<std::regex>> compiled_;
  std::shared_ptr<CallLog> log_;
};

struct RemoteGatewayConfig {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry{};
  int max_in_flight = 4;
};

/// OpenAI-compatible chat completions: one user message carrying the prompt,
/// answer read from choices[0].message.content.
class RemoteGateway final : public LlmGateway {
 public:
  RemoteGateway(RemoteGatewayConfig config, std::shared_ptr<HttpTransport> transport,
                Sleeper sleeper = real_sleeper(), std::shared_ptr<CallLog> log = nullptr);

  std::string complete(const CompletionRequest& request) override;

  const RemoteGatewayConfig& config() const { return config_; }

 private:
  RemoteGatewayConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
  std::shared_ptr<CallLog> log_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

/// ISO-8601 UTC wall-clock time, second resolution.
std::string utc_timestamp();

}  // namespace neganchor

#endif  // NEGANCHOR_LLM_GATEWAY_HPP
