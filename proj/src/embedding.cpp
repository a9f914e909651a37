#include "neganchor/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "neganchor/error.hpp"
#include "json.hpp"

namespace neganchor {

using nlohmann::json;

std::string_view trim(std::string_view text) {
  constexpr std::string_view ws = " \t\n\r\f\v";
  const auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

double l2_norm(const EmbeddingVector& v) {
  double sum = 0.0;
  for (double x : v.values) sum += x * x;
  return std::sqrt(sum);
}

EmbeddingVector normalized(std::vector<double> raw) {
  EmbeddingVector v{std::move(raw)};
  const double norm = l2_norm(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorKind::ParameterInvalid, "cannot normalize a zero or non-finite vector");
  }
  for (double& x : v.values) x /= norm;
  return v;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw Error(ErrorKind::DimMismatch,
                "cosine over dims " + std::to_string(u.dim()) + " and " + std::to_string(v.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) dot += u.values[i] * v.values[i];
  return std::clamp(dot, -1.0, 1.0);
}

std::string_view to_string(ProviderKind kind) {
  return kind == ProviderKind::Remote ? "remote" : "deterministic-test";
}

ProviderKind provider_kind_from_string(std::string_view name) {
  if (name == "remote") return ProviderKind::Remote;
  if (name == "deterministic-test") return ProviderKind::DeterministicTest;
  throw Error(ErrorKind::SchemaMismatch, "unknown provider kind '" + std::string(name) + "'");
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

// ---------------------------------------------------------------------------

HashingEmbedder::HashingEmbedder(std::size_t dim)
    : descriptor_{"trigram-hash-v1", dim, ProviderKind::DeterministicTest} {
  if (dim == 0) throw Error(ErrorKind::ParameterInvalid, "embedding dim must be positive");
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
  const std::string_view body = trim(text);
  if (body.empty()) throw Error(ErrorKind::EmptyText, "cannot embed blank text");

  std::string padded;
  padded.reserve(body.size() + 2);
  padded.push_back(' ');
  for (char c : body) {
    padded.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  padded.push_back(' ');

  std::vector<double> counts(descriptor_.dim, 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    std::uint64_t h = kTrigramSeed;
    for (std::size_t j = i; j < i + 3; ++j) {
      h ^= static_cast<unsigned char>(padded[j]);
      h *= kFnvPrime;
    }
    counts[h % descriptor_.dim] += 1.0;
  }
  return normalized(std::move(counts));
}

// ---------------------------------------------------------------------------

LookupEmbedder::LookupEmbedder(std::string provider_id, std::size_t dim,
                               std::map<std::string, EmbeddingVector, std::less<>> table)
    : descriptor_{std::move(provider_id), dim, ProviderKind::DeterministicTest},
      table_(std::move(table)) {
  for (const auto& [text, vec] : table_) {
    if (vec.dim() != dim) {
      throw Error(ErrorKind::DimMismatch, "lookup vector for '" + text + "' has wrong dim");
    }
  }
}

LookupEmbedder LookupEmbedder::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open embedding table " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, path + ": " + e.what());
  }
  std::map<std::string, EmbeddingVector, std::less<>> table;
  const auto dim = doc.at("dim").get<std::size_t>();
  for (const auto& entry : doc.at("vectors")) {
    table.emplace(entry.at("text").get<std::string>(),
                  normalized(entry.at("embedding").get<std::vector<double>>()));
  }
  return LookupEmbedder(doc.at("provider_id").get<std::string>(), dim, std::move(table));
}

void LookupEmbedder::save(const std::string& path) const {
  json vectors = json::array();
  for (const auto& [text, vec] : table_) {
    vectors.push_back({{"text", text}, {"embedding", vec.values}});
  }
  json doc = {{"provider_id", descriptor_.provider_id},
              {"dim", descriptor_.dim},
              {"vectors", std::move(vectors)}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write embedding table " + path);
  out << doc.dump() << '\n';
}

EmbeddingVector LookupEmbedder::embed(std::string_view text) const {
  const std::string_view body = trim(text);
  if (body.empty()) throw Error(ErrorKind::EmptyText, "cannot embed blank text");
  auto it = table_.find(body);
  if (it == table_.end()) {
    throw Error(ErrorKind::ProviderUnavailable,
                "lookup table has no vector for '" + std::string(body) + "'");
  }
  return it->second;
}

// ---------------------------------------------------------------------------

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config,
                               std::shared_ptr<HttpTransport> transport, Sleeper sleeper)
    : config_(std::move(config)),
      descriptor_{"remote:" + config_.model, config_.dim, ProviderKind::Remote},
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(std::max(1, config_.max_in_flight))) {
  if (config_.dim == 0) throw Error(ErrorKind::ParameterInvalid, "remote embedder needs a dim");
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  const std::string one(text);
  return embed_batch(std::span<const std::string>(&one, 1)).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  json input = json::array();
  for (const auto& t : texts) {
    if (trim(t).empty()) throw Error(ErrorKind::EmptyText, "cannot embed blank text");
    input.push_back(std::string(trim(t)));
  }
  const std::string key = api_key_from_env();
  if (key.empty()) {
    throw Error(ErrorKind::AuthMissing, std::string(kApiKeyEnv) + " is not set");
  }

  HttpRequest request{config_.url,
                      {{"Authorization", "Bearer " + key}, {"Content-Type", "application/json"}},
                      json{{"input", std::move(input)}, {"model", config_.model}}.dump(),
                      config_.timeout};

  HttpResponse response;
  for (int attempt = 0;; ++attempt) {
    in_flight_->acquire();
    response = transport_->post(request);
    in_flight_->release();
    if (!response.retryable()) break;
    if (attempt >= config_.retry.max_retries) {
      throw Error(ErrorKind::ProviderUnavailable,
                  "embedding endpoint failed after " + std::to_string(attempt + 1) +
                      " attempts (status " + std::to_string(response.status) + ")");
    }
    sleeper_(config_.retry.backoff(attempt));
  }
  if (response.status < 200 || response.status >= 300) {
    throw Error(ErrorKind::ProviderUnavailable,
                "embedding endpoint returned status " + std::to_string(response.status));
  }

  std::vector<EmbeddingVector> out;
  try {
    const json doc = json::parse(response.body);
    for (const auto& item : doc.at("data")) {
      auto vec = normalized(item.at("embedding").get<std::vector<double>>());
      if (vec.dim() != config_.dim) {
        throw Error(ErrorKind::DimMismatch, "endpoint returned dim " + std::to_string(vec.dim()));
      }
      out.push_back(std::move(vec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ProviderUnavailable, std::string("malformed embedding response: ") + e.what());
  }
  if (out.size() != texts.size()) {
    throw Error(ErrorKind::ProviderUnavailable, "embedding response count does not match input");
  }
  return out;
}

}  // namespace neganchor
