#ifndef NEGANCHOR_EMBEDDING_HPP
#define NEGANCHOR_EMBEDDING_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neganchor/http.hpp"

namespace neganchor {

/// Dense sentence embedding. Providers always hand out unit-norm vectors.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

/// Scales `raw` to unit L2 norm. Throws ParameterInvalid on a zero vector.
EmbeddingVector normalized(std::vector<double> raw);

double l2_norm(const EmbeddingVector& v);

/// Dot product of two unit-norm vectors, clamped to [-1, 1].
/// Throws DimMismatch when the dimensions differ.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

enum class ProviderKind { Remote, DeterministicTest };

std::string_view to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(std::string_view name);

struct ProviderDescriptor {
  std::string provider_id;
  std::size_t dim = 0;
  ProviderKind kind = ProviderKind::DeterministicTest;

  bool operator==(const ProviderDescriptor&) const = default;
};

/// Sentence encoder. Implementations are immutable after construction and
/// safe to call from several threads at once.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual const ProviderDescriptor& descriptor() const = 0;

  /// Throws EmptyText when `text` is blank after trimming.
  virtual EmbeddingVector embed(std::string_view text) const = 0;

  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
};

/// Offline encoder: character trigrams of the lowercased, space-padded text
/// are hashed with FNV-1a (offset basis replaced by kTrigramSeed) into `dim`
/// buckets, counted, then L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  static constexpr std::uint64_t kTrigramSeed = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;
  static constexpr std::size_t kDefaultDim = 64;

  explicit HashingEmbedder(std::size_t dim = kDefaultDim);

  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  ProviderDescriptor descriptor_;
};

/// Offline encoder backed by a fixed text -> vector table (used by the
/// synthetic task, whose geometry is generated directly in embedding space).
class LookupEmbedder final : public Embedder {
 public:
  LookupEmbedder(std::string provider_id, std::size_t dim,
                 std::map<std::string, EmbeddingVector, std::less<>> table);

  /// Reads {"provider_id", "dim", "vectors": [{"text", "embedding"}]}.
  static LookupEmbedder from_file(const std::string& path);
  void save(const std::string& path) const;

  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  EmbeddingVector embed(std::string_view text) const override;

  const std::map<std::string, EmbeddingVector, std::less<>>& table() const { return table_; }

 private:
  ProviderDescriptor descriptor_;
  std::map<std::string, EmbeddingVector, std::less<>> table_;
};

struct RemoteEmbedderConfig {
  std::string url;
  std::string model;
  std::size_t dim = 0;
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry{};
  int max_in_flight = 4;
};

/// OpenAI-style embeddings endpoint: POST {input: [...], model} and read
/// data[i].embedding. Transport failures and 429/5xx are retried with
/// exponential backoff; exhausting the retries raises ProviderUnavailable.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(RemoteEmbedderConfig config, std::shared_ptr<HttpTransport> transport,
                 Sleeper sleeper = real_sleeper());

  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  RemoteEmbedderConfig config_;
  ProviderDescriptor descriptor_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

/// ASCII whitespace trim shared by every text-facing module.
std::string_view trim(std::string_view text);

}  // namespace neganchor

#endif  // NEGANCHOR_EMBEDDING_HPP
