#ifndef NEGANCHOR_HTTP_HPP
#define NEGANCHOR_HTTP_HPP

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace neganchor {

/// Name of the environment variable holding the bearer token for every
/// remote provider (chat completions and embeddings).
inline constexpr const char* kApiKeyEnv = "NEGANCHOR_API_KEY";

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{30000};
};

struct HttpResponse {
  /// 0 when the request never produced a status line.
  int status = 0;
  std::string body;
  std::string transport_error;

  bool transport_failed() const { return status == 0; }
  bool retryable() const {
    return transport_failed() || status == 429 || status >= 500;
  }
};

/// POST-only transport seam. Remote providers go through this so tests can
/// substitute a scripted or I/O-recording double.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport; https URLs need OpenSSL at build time.
std::shared_ptr<HttpTransport> make_default_transport();

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Sleeper that actually blocks the calling thread.
Sleeper real_sleeper();

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{1000};
  double multiplier = 2.0;

  /// Delay before retry number `retry` (0-based): base * multiplier^retry.
  std::chrono::milliseconds backoff(int retry) const;
};

/// Empty when the variable is unset.
std::string api_key_from_env();

}  // namespace neganchor

#endif  // NEGANCHOR_HTTP_HPP
