#ifndef NEGANCHOR_SYNTHETIC_HPP
#define NEGANCHOR_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "neganchor/corpus.hpp"
#include "neganchor/embedding.hpp"
#include "neganchor/llm_gateway.hpp"

namespace neganchor {

struct SyntheticParams {
  std::uint64_t seed = 7;
  std::size_t n_items = 120;
  std::size_t dim = 32;
  std::size_t n_concepts = 6;
  /// Capped at n_concepts / 2: every hard concept needs an easy decoy.
  std::size_t n_hard = 2;
  double theta = 0.8;

  void validate() const;
};

/// Ground truth for one generated item, hidden from the pipeline and known
/// only to the threshold mock (and to test oracles).
struct SyntheticItem {
  std::string id;
  std::string question;
  std::size_t concept_id = 0;
  bool easy = true;
  std::string gold;
  std::string wrong;
  EmbeddingVector embedding;
};

struct SyntheticTask {
  SyntheticParams params;
  std::vector<SyntheticItem> items;
  std::vector<bool> hard_concepts;

  std::vector<DatasetItem> dataset() const;
  /// LookupEmbedder over the generated vectors.
  LookupEmbedder embedder() const;
};

/**
 * Builds an offline task in embedding space.
 *
 * Concept centres are random unit directions. Each hard concept is paired
 * with an easy decoy concept whose centre sits next to it along a random
 * axis u; hard-concept items are spread along u, and the ones leaning
 * towards the decoy are the ones the zero-shot model gets wrong. Easy
 * concepts are compact and always answered correctly. Item i belongs to
 * concept i % n_concepts. Everything is drawn from one mt19937_64 seeded
 * with params.seed.
 *
 * Throws ParameterInvalid when n_items < 4 * n_concepts or other
 * parameters are out of range.
 */
SyntheticTask generate_synthetic_task(const SyntheticParams& params);

/// Answer key for the threshold mock.
struct ThresholdScript {
  struct Entry {
    std::size_t concept_id = 0;
    bool easy = true;
    std::string gold;
    std::string wrong;
  };
  double theta = 0.8;
  std::map<std::string, Entry, std::less<>> by_question;

  static ThresholdScript from_task(const SyntheticTask& task);
  static ThresholdScript from_file(const std::string& path);
  void save(const std::string& path) const;
};

/**
 * Scripted completion provider for the synthetic task. It reads the
 * question lines ("Q: ...") of the prompt; the last one is the query, the
 * others are demonstrations (the negative slot of the contrastive template
 * is ignored). It answers correctly iff the query item is easy, or some
 * demonstration of the query's concept has cosine similarity above theta
 * to the query. No network I/O.
 */
class ThresholdGateway final : public LlmGateway {
 public:
  ThresholdGateway(ThresholdScript script, std::shared_ptr<const Embedder> embedder);

  std::string complete(const CompletionRequest& request) override;

  /// The decision without the response text; exposed for tests.
  bool would_answer_correctly(const std::string& query,
                              const std::vector<std::string>& demonstrations) const;

 private:
  ThresholdScript script_;
  std::shared_ptr<const Embedder> embedder_;
};

struct ParsedPrompt {
  std::string query;
  /// Demonstrations shown as worked examples, in prompt order.
  std::vector<std::string> demonstrations;
};

ParsedPrompt parse_prompt_questions(std::string_view prompt);

/// Writes dataset.jsonl, embeddings.json, mock.json and config.json into
/// `dir` (created when missing).
void write_synthetic_bundle(const SyntheticTask& task, const std::string& dir);

}  // namespace neganchor

#endif  // NEGANCHOR_SYNTHETIC_HPP
