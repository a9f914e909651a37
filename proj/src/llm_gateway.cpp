#include "neganchor/llm_gateway.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace neganchor {

using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string prompt_hash(std::string_view prompt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CallLog::CallLog(std::string jsonl_path) : path_(std::move(jsonl_path)) {}

void CallLog::append(CallRecord record) {
  std::lock_guard lock(mutex_);
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    out << json{{"timestamp", record.timestamp},   {"prompt_hash", record.prompt_hash},
                {"model", record.model},           {"latency_ms", record.latency_ms},
                {"outcome", record.outcome},       {"attempt", record.attempt},
                {"backoff_ms", record.backoff_ms}}
               .dump()
        << '\n';
  }
  records_.push_back(std::move(record));
}

std::vector<CallRecord> CallLog::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::vector<CompletionOutcome> LlmGateway::complete_batch(std::span<const CompletionRequest> requests,
                                                          int max_in_flight) {
  if (max_in_flight < 1) throw Error(ErrorKind::ParameterInvalid, "max_in_flight must be >= 1");
  std::vector<CompletionOutcome> results(requests.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        results[i].text = complete(requests[i]);
      } catch (const Error& e) {
        results[i].error = e;
      } catch (const std::exception& e) {
        results[i].error = Error(ErrorKind::Transport, e.what());
      }
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), requests.size());
  if (workers <= 1) {
    worker();
    return results;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

// ---------------------------------------------------------------------------

ScriptedBehavior ScriptedBehavior::from_json_text(const std::string& text) {
  ScriptedBehavior behavior;
  try {
    const json doc = json::parse(text);
    behavior.default_response = doc.value("default", std::string());
    for (const auto& r : doc.value("rules", json::array())) {
      ScriptRule rule;
      if (r.contains("regex")) {
        rule.match = ScriptRule::Match::Regex;
        rule.pattern = r.at("regex").get<std::string>();
      } else {
        rule.pattern = r.at("substring").get<std::string>();
      }
      rule.response = r.value("response", std::string());
      if (r.contains("error")) rule.fail_with = error_kind_from_string(r.at("error").get<std::string>());
      behavior.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("bad script: ") + e.what());
  }
  return behavior;
}

ScriptedBehavior ScriptedBehavior::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open script " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

ScriptedGateway::ScriptedGateway(ScriptedBehavior behavior, std::shared_ptr<CallLog> log)
    : behavior_(std::move(behavior)), log_(std::move(log)) {
  for (const auto& rule : behavior_.rules) {
    if (rule.match == ScriptRule::Match::Regex) {
      try {
        compiled_.emplace_back(std::regex(rule.pattern));
      } catch (const std::regex_error& e) {
        throw Error(ErrorKind::ConfigInvalid, "bad regex '" + rule.pattern + "': " + e.what());
      }
    } else {
      compiled_.emplace_back(std::nullopt);
    }
  }
}

std::string ScriptedGateway::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw Error(ErrorKind::ParameterInvalid, "empty prompt");
  const ScriptRule* hit = nullptr;
  for (std::size_t i = 0; i < behavior_.rules.size() && hit == nullptr; ++i) {
    const auto& rule = behavior_.rules[i];
    const bool matched = compiled_[i] ? std::regex_search(request.prompt, *compiled_[i])
                                      : request.prompt.find(rule.pattern) != std::string::npos;
    if (matched) hit = &rule;
  }
  const std::string outcome =
      hit != nullptr && hit->fail_with ? std::string(to_string(*hit->fail_with)) : "ok";
  if (log_) {
    log_->append({utc_timestamp(), prompt_hash(request.prompt), request.model, 0, outcome, 0, 0});
  }
  if (hit == nullptr) return behavior_.default_response;
  if (hit->fail_with) throw Error(*hit->fail_with, "scripted failure for rule '" + hit->pattern + "'");
  return hit->response;
}

// ---------------------------------------------------------------------------

RemoteGateway::RemoteGateway(RemoteGatewayConfig config, std::shared_ptr<HttpTransport> transport,
                             Sleeper sleeper, std::shared_ptr<CallLog> log)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      log_(std::move(log)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(std::max(1, config_.max_in_flight))) {}

std::string RemoteGateway::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw Error(ErrorKind::ParameterInvalid, "empty prompt");
  const std::string key = api_key_from_env();
  if (key.empty()) throw Error(ErrorKind::AuthMissing, std::string(kApiKeyEnv) + " is not set");

  const std::string model = request.model.empty() ? config_.model : request.model;
  const json body = {{"model", model},
                     {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                     {"temperature", request.temperature},
                     {"max_tokens", request.max_tokens}};
  const HttpRequest http{config_.url,
                         {{"Authorization", "Bearer " + key}, {"Content-Type", "application/json"}},
                         body.dump(),
                         config_.timeout};
  const std::string hash = prompt_hash(request.prompt);

  for (int attempt = 0;; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    in_flight_->acquire();
    const HttpResponse response = transport_->post(http);
    in_flight_->release();
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();

    const bool will_retry = response.retryable() && attempt < config_.retry.max_retries;
    const auto backoff = will_retry ? config_.retry.backoff(attempt) : std::chrono::milliseconds(0);
    std::string outcome = "ok";
    if (response.transport_failed()) {
      outcome = "Transport";
    } else if (response.status == 429) {
      outcome = "RateLimited";
    } else if (response.status < 200 || response.status >= 300) {
      outcome = "Transport";
    }
    if (log_) log_->append({utc_timestamp(), hash, model, latency, outcome, attempt, backoff.count()});

    if (will_retry) {
      sleeper_(backoff);
      continue;
    }
    if (response.status == 429) {
      throw Error(ErrorKind::RateLimited, "rate limited after " + std::to_string(attempt + 1) + " attempts");
    }
    if (response.transport_failed()) {
      throw Error(ErrorKind::Transport, response.transport_error.empty() ? "no response"
                                                                         : response.transport_error);
    }
    if (response.status < 200 || response.status >= 300) {
      throw Error(ErrorKind::Transport, "HTTP " + std::to_string(response.status));
    }
    try {
      const json doc = json::parse(response.body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Transport, std::string("malformed completion response: ") + e.what());
    }
  }
}

}  // namespace neganchor
