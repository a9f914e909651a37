#ifndef NEGANCHOR_DEMO_BUILDER_HPP
#define NEGANCHOR_DEMO_BUILDER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neganchor/corpus.hpp"
#include "neganchor/embedding.hpp"

namespace neganchor {

enum class StrategyKind { ZeroShotCot, SimilarityFewShot, ContrastiveCot, RandomFewShot, NegAnchored };

/// Which demonstrations to show. For NegAnchored, m direct positives plus n
/// positives anchored on the query's n nearest negatives, m + n = total.
struct StrategyConfig {
  StrategyKind kind = StrategyKind::ZeroShotCot;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t total = 0;
  /// RandomFewShot only.
  std::uint64_t seed = 0;

  static StrategyConfig zero_shot() { return {}; }
  static StrategyConfig similarity(std::size_t total) { return {StrategyKind::SimilarityFewShot, 0, 0, total, 0}; }
  static StrategyConfig contrastive(std::size_t total) { return {StrategyKind::ContrastiveCot, 0, 0, total, 0}; }
  static StrategyConfig random(std::size_t total, std::uint64_t seed) {
    return {StrategyKind::RandomFewShot, 0, 0, total, seed};
  }
  static StrategyConfig neg_anchored(std::size_t m, std::size_t n) {
    return {StrategyKind::NegAnchored, m, n, m + n, 0};
  }

  /// Throws StrategyInvalid.
  void validate() const;

  /// Machine name: "zero-shot-cot", "similarity:2", "contrastive:2",
  /// "random:2", "neg-anchored:1,1". parse() is its inverse.
  std::string name() const;
  /// Table label, e.g. "NegAnchored (m=1, n=1)".
  std::string display_name() const;
  static StrategyConfig parse(std::string_view name, std::uint64_t random_seed = 0);

  bool operator==(const StrategyConfig&) const = default;
};

struct Demonstration {
  std::string id;
  std::string question;
  std::string rationale;
  std::string answer;
  Polarity polarity = Polarity::Positive;
  /// Similarity that selected this exemplar (to the query, or to its anchor).
  double score = 0.0;
  /// Negative exemplar this one was retrieved through; empty for direct hits.
  std::string anchor_id;

  bool operator==(const Demonstration&) const = default;
};

inline constexpr std::string_view kTemplateZeroShot = "zero-shot-cot/v1";
inline constexpr std::string_view kTemplateFewShot = "qa-cot/v1";
inline constexpr std::string_view kTemplateContrastive = "contrastive/v1";

struct PromptBundle {
  std::vector<Demonstration> demonstrations;
  /// ContrastiveCot only.
  std::optional<std::vector<Demonstration>> negative_block;
  std::string query;
  std::string template_id;

  bool operator==(const PromptBundle&) const = default;
};

struct BundleOptions {
  bool allow_duplicates = false;
  /// Puts anchored positives before the direct ones (ablation switch).
  bool anchored_first = false;
};

/**
 * Assembles the demonstrations for one query.
 *
 *  - NegAnchored: top-m positives for the query, then for each of the
 *    query's top-n negatives the nearest positive not already used.
 *  - SimilarityFewShot: top-total positives.
 *  - ContrastiveCot: top-total/2 positives and top-total/2 negatives.
 *  - RandomFewShot: `total` positives drawn uniformly without replacement,
 *    seeded by the strategy seed and the query text.
 *  - ZeroShotCot: nothing.
 *
 * Throws InsufficientCorpus when a store cannot supply the required count
 * and StrategyInvalid for inconsistent configs.
 */
PromptBundle build_bundle(std::string_view query, const EmbeddingVector& query_vec,
                          const CorpusPair& corpora, const StrategyConfig& strategy,
                          const BundleOptions& options = {});

/// Convenience overload that embeds the query text first.
PromptBundle build_bundle(std::string_view query, const CorpusPair& corpora,
                          const StrategyConfig& strategy, const Embedder& embedder,
                          const BundleOptions& options = {});

/// Deterministic prompt text for the bundle.
std::string render_prompt(const PromptBundle& bundle);

}  // namespace neganchor

#endif  // NEGANCHOR_DEMO_BUILDER_HPP
