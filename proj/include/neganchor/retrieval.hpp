#ifndef NEGANCHOR_RETRIEVAL_HPP
#define NEGANCHOR_RETRIEVAL_HPP

#include <set>
#include <span>
#include <string>
#include <vector>

#include "neganchor/corpus.hpp"
#include "neganchor/embedding.hpp"

namespace neganchor {

using IdSet = std::set<std::string, std::less<>>;

struct RetrievalHit {
  std::string exemplar_id;
  /// Cosine similarity, in [-1, 1].
  double score = 0.0;

  bool operator==(const RetrievalHit&) const = default;
};

struct AnchoredPositive {
  /// The negative exemplar the search started from.
  std::string anchor_id;
  std::string positive_id;
  /// Cosine between the anchor's and the positive's embeddings.
  double score = 0.0;

  bool operator==(const AnchoredPositive&) const = default;
};

/// Orders candidates by score descending, ties by ascending id, and keeps the
/// first k. Only the relative order of scores matters.
std::vector<RetrievalHit> rank_hits(std::vector<RetrievalHit> candidates, std::size_t k);

/// Exact linear scan: the k records most similar to `query`, skipping ids in
/// `exclude`. Throws DimMismatch.
std::vector<RetrievalHit> top_k(std::span<const ExemplarRecord> store, const EmbeddingVector& query,
                                std::size_t k, const IdSet& exclude = {});

struct AnchorOptions {
  /// Lets later anchors reuse positives already picked (ablation switch).
  bool allow_duplicates = false;
};

/**
 * Negative-anchored second stage. For each anchor in order, picks the
 * positive whose embedding is most similar to the anchor's own embedding.
 * Candidates in `dedup_against` are never chosen; unless allow_duplicates is
 * set, neither are positives picked by earlier anchors of the same call.
 *
 * Throws PositiveStoreEmpty when some anchor has no candidate left and
 * ParameterInvalid when an anchor id is not in `negatives`.
 */
std::vector<AnchoredPositive> anchor_positives(std::span<const RetrievalHit> anchors,
                                               std::span<const ExemplarRecord> negatives,
                                               std::span<const ExemplarRecord> positives,
                                               const IdSet& dedup_against,
                                               const AnchorOptions& options = {});

}  // namespace neganchor

#endif  // NEGANCHOR_RETRIEVAL_HPP
