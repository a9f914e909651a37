#include "neganchor/http.hpp"

#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

#include "httplib.h"

namespace neganchor {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) {
    return {url, "/"};
  }
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const SplitUrl target = split_url(request.url);
    HttpResponse out;
    try {
      httplib::Client client(target.origin);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
          request.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());

      httplib::Headers headers;
      for (const auto& [name, value] : request.headers) headers.emplace(name, value);

      auto result = client.Post(target.path, headers, request.body, "application/json");
      if (!result) {
        out.transport_error = httplib::to_string(result.error());
        return out;
      }
      out.status = result->status;
      out.body = result->body;
    } catch (const std::exception& e) {
      out.status = 0;
      out.transport_error = e.what();
    }
    return out;
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() {
  return std::make_shared<HttplibTransport>();
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds RetryPolicy::backoff(int retry) const {
  const double scaled = static_cast<double>(base_delay.count()) * std::pow(multiplier, retry);
  return std::chrono::milliseconds(static_cast<long long>(std::llround(scaled)));
}

std::string api_key_from_env() {
  const char* value = std::getenv(kApiKeyEnv);
  return value == nullptr ? std::string() : std::string(value);
}

}  // namespace neganchor
