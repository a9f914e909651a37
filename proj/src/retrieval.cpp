#include "neganchor/retrieval.hpp"

#include <algorithm>

#include "neganchor/error.hpp"

namespace neganchor {

std::vector<RetrievalHit> rank_hits(std::vector<RetrievalHit> candidates, std::size_t k) {
  auto before = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.exemplar_id < b.exemplar_id;
  };
  k = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), before);
  candidates.resize(k);
  return candidates;
}

std::vector<RetrievalHit> top_k(std::span<const ExemplarRecord> store, const EmbeddingVector& query,
                                std::size_t k, const IdSet& exclude) {
  if (k == 0) return {};
  std::vector<RetrievalHit> candidates;
  candidates.reserve(store.size());
  for (const auto& record : store) {
    if (exclude.contains(record.id)) continue;
    candidates.push_back({record.id, cosine(record.embedding, query)});
  }
  return rank_hits(std::move(candidates), k);
}

std::vector<AnchoredPositive> anchor_positives(std::span<const RetrievalHit> anchors,
                                               std::span<const ExemplarRecord> negatives,
                                               std::span<const ExemplarRecord> positives,
                                               const IdSet& dedup_against,
                                               const AnchorOptions& options) {
  std::vector<AnchoredPositive> out;
  out.reserve(anchors.size());
  IdSet taken(dedup_against.begin(), dedup_against.end());

  for (const auto& anchor : anchors) {
    auto it = std::find_if(negatives.begin(), negatives.end(),
                           [&](const ExemplarRecord& r) { return r.id == anchor.exemplar_id; });
    if (it == negatives.end()) {
      throw Error(ErrorKind::ParameterInvalid,
                  "anchor '" + anchor.exemplar_id + "' is not in the negative store");
    }
    const auto best = top_k(positives, it->embedding, 1, options.allow_duplicates ? dedup_against : taken);
    if (best.empty()) {
      throw Error(ErrorKind::PositiveStoreEmpty,
                  "no positive left for anchor '" + anchor.exemplar_id + "'");
    }
    out.push_back({anchor.exemplar_id, best.front().exemplar_id, best.front().score});
    taken.insert(best.front().exemplar_id);
  }
  return out;
}

}  // namespace neganchor
