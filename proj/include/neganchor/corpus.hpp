#ifndef NEGANCHOR_CORPUS_HPP
#define NEGANCHOR_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neganchor/answer_extraction.hpp"
#include "neganchor/embedding.hpp"
#include "neganchor/error.hpp"
#include "neganchor/llm_gateway.hpp"

namespace neganchor {

enum class Polarity { Positive, Negative };

std::string_view to_string(Polarity polarity);

struct ExemplarRecord {
  std::string id;
  std::string question;
  /// The model's Zero-Shot-CoT output, kept verbatim (wrong ones included).
  std::string rationale;
  /// Normalized prediction; empty when extraction failed.
  std::string predicted;
  std::string gold;
  Polarity polarity = Polarity::Negative;
  EmbeddingVector embedding;
  std::size_t cluster = 0;
  std::string dataset;
  bool extraction_failed = false;

  bool operator==(const ExemplarRecord&) const = default;
};

struct CorpusPair {
  std::vector<ExemplarRecord> positives;
  std::vector<ExemplarRecord> negatives;
  ProviderDescriptor provider;
  std::string dataset;
  TaskFamily task_family;
  std::uint64_t build_seed = 0;
  std::string built_at;

  bool operator==(const CorpusPair&) const = default;
};

inline constexpr int kCorpusFormatVersion = 1;

/// Dataset row: {id, question, answer}. Multiple-choice questions carry their
/// rendered choice block and the answer is the letter.
struct DatasetItem {
  std::string id;
  std::string question;
  std::string answer;
  bool operator==(const DatasetItem&) const = default;
};

std::vector<DatasetItem> load_dataset(const std::string& path);
void save_dataset(std::span<const DatasetItem> items, const std::string& path);

struct TrainItem {
  std::string id;
  std::string question;
  /// Raw gold answer; normalized with the prediction normalizer on ingestion.
  std::string gold;
  std::size_t cluster = 0;
};

struct CorpusBuildOptions {
  std::string dataset;
  std::string model;
  int max_in_flight = 4;
  /// Progress is flushed here every `checkpoint_every` items and picked up
  /// again by the next build; removed once the build completes.
  std::optional<std::string> checkpoint_path;
  std::size_t checkpoint_every = 20;
};

/// Runs the Zero-Shot-CoT prompt over every train item, extracts the answer,
/// and routes each record by agreement with gold. Unparsable outputs become
/// negatives with extraction_failed set. Records come back sorted by id.
///
/// Gateway or embedder failures flush the checkpoint and raise
/// ProviderUnavailable.
CorpusPair build_corpora(std::span<const TrainItem> train_items, LlmGateway& llm,
                         const Embedder& embedder, const TaskFamily& family, std::uint64_t seed,
                         const CorpusBuildOptions& options = {});

/// Gold normalization shared by corpus build and evaluation. Throws
/// ParameterInvalid when the gold string has no answer of the family.
NormalizedAnswer normalize_gold(std::string_view gold, const TaskFamily& family);

/// JSONL: a header line {format, version, provider, dataset, task_family,
/// build_seed, built_at} followed by one record per line, sorted by id.
void save_corpus(const CorpusPair& pair, const std::string& path);

class CorruptLineError : public Error {
 public:
  CorruptLineError(std::size_t line, const std::string& message)
      : Error(ErrorKind::CorruptLine, "line " + std::to_string(line) + ": " + message), line_(line) {}
  /// 1-based.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Throws SchemaMismatch (version, dim or provider differs from `expected`),
/// CorruptLineError for unparsable lines, Io when the file is missing.
CorpusPair load_corpus(const std::string& path,
                       const std::optional<ProviderDescriptor>& expected = std::nullopt);

}  // namespace neganchor

#endif  // NEGANCHOR_CORPUS_HPP
