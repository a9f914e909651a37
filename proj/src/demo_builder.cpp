#include "neganchor/demo_builder.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "neganchor/error.hpp"
#include "neganchor/prompt_format.hpp"
#include "neganchor/random.hpp"
#include "neganchor/retrieval.hpp"

namespace neganchor {

namespace {

std::size_t parse_count(std::string_view text, std::string_view whole) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorKind::StrategyInvalid, "bad count in strategy '" + std::string(whole) + "'");
  }
  return value;
}

const ExemplarRecord& find_record(std::span<const ExemplarRecord> store, const std::string& id) {
  auto it = std::find_if(store.begin(), store.end(), [&](const ExemplarRecord& r) { return r.id == id; });
  if (it == store.end()) throw Error(ErrorKind::ParameterInvalid, "unknown exemplar '" + id + "'");
  return *it;
}

Demonstration to_demo(const ExemplarRecord& r, double score, std::string anchor = {}) {
  return {r.id, r.question, r.rationale, r.predicted, r.polarity, score, std::move(anchor)};
}

std::vector<Demonstration> demos_from_hits(std::span<const ExemplarRecord> store,
                                           const std::vector<RetrievalHit>& hits) {
  std::vector<Demonstration> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(to_demo(find_record(store, h.exemplar_id), h.score));
  return out;
}

void require(std::size_t have, std::size_t need, std::string_view what) {
  if (have < need) {
    throw Error(ErrorKind::InsufficientCorpus, std::string(what) + " store has " + std::to_string(have) +
                                                   " records, strategy needs " + std::to_string(need));
  }
}

std::uint64_t query_seed(std::uint64_t seed, std::string_view query) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : query) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return seed ^ h;
}

std::string render_block(const std::vector<Demonstration>& demos) {
  std::string out;
  for (const auto& d : demos) out += render_demonstration(d.question, d.rationale, d.answer);
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

}  // namespace

void StrategyConfig::validate() const {
  auto fail = [&](const std::string& why) { throw Error(ErrorKind::StrategyInvalid, name() + ": " + why); };
  switch (kind) {
    case StrategyKind::ZeroShotCot:
      if (total != 0 || m != 0 || n != 0) fail("zero-shot takes no demonstrations");
      break;
    case StrategyKind::NegAnchored:
      if (m + n != total) fail("m + n must equal total");
      if (total == 0) fail("total must be positive");
      break;
    case StrategyKind::ContrastiveCot:
      if (total == 0 || total % 2 != 0) fail("total must be a positive even number");
      break;
    case StrategyKind::SimilarityFewShot:
    case StrategyKind::RandomFewShot:
      if (total == 0) fail("total must be positive");
      break;
  }
}

std::string StrategyConfig::name() const {
  switch (kind) {
    case StrategyKind::ZeroShotCot: return "zero-shot-cot";
    case StrategyKind::SimilarityFewShot: return "similarity:" + std::to_string(total);
    case StrategyKind::ContrastiveCot: return "contrastive:" + std::to_string(total);
    case StrategyKind::RandomFewShot: return "random:" + std::to_string(total);
    case StrategyKind::NegAnchored: return "neg-anchored:" + std::to_string(m) + "," + std::to_string(n);
  }
  return "unknown";
}

std::string StrategyConfig::display_name() const {
  switch (kind) {
    case StrategyKind::ZeroShotCot: return "Zero-Shot-CoT";
    case StrategyKind::SimilarityFewShot: return "Similarity Few-Shot (" + std::to_string(total) + ")";
    case StrategyKind::ContrastiveCot: return "Contrastive CoT (" + std::to_string(total) + ")";
    case StrategyKind::RandomFewShot: return "Random Few-Shot (" + std::to_string(total) + ")";
    case StrategyKind::NegAnchored:
      return "NegAnchored (m=" + std::to_string(m) + ", n=" + std::to_string(n) + ")";
  }
  return "unknown";
}

StrategyConfig StrategyConfig::parse(std::string_view name, std::uint64_t random_seed) {
  if (name == "zero-shot-cot") return zero_shot();
  const auto colon = name.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::StrategyInvalid, "unknown strategy '" + std::string(name) + "'");
  }
  const std::string_view head = name.substr(0, colon);
  const std::string_view args = name.substr(colon + 1);
  StrategyConfig config;
  if (head == "neg-anchored") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorKind::StrategyInvalid, "neg-anchored needs 'm,n' in '" + std::string(name) + "'");
    }
    config = neg_anchored(parse_count(args.substr(0, comma), name), parse_count(args.substr(comma + 1), name));
  } else if (head == "similarity") {
    config = similarity(parse_count(args, name));
  } else if (head == "contrastive") {
    config = contrastive(parse_count(args, name));
  } else if (head == "random") {
    config = random(parse_count(args, name), random_seed);
  } else {
    throw Error(ErrorKind::StrategyInvalid, "unknown strategy '" + std::string(name) + "'");
  }
  config.validate();
  return config;
}

PromptBundle build_bundle(std::string_view query, const EmbeddingVector& query_vec,
                          const CorpusPair& corpora, const StrategyConfig& strategy,
                          const BundleOptions& options) {
  strategy.validate();
  PromptBundle bundle;
  bundle.query = std::string(query);
  bundle.template_id = std::string(kTemplateFewShot);
  const auto& positives = corpora.positives;
  const auto& negatives = corpora.negatives;

  switch (strategy.kind) {
    case StrategyKind::ZeroShotCot:
      bundle.template_id = std::string(kTemplateZeroShot);
      break;

    case StrategyKind::SimilarityFewShot:
      require(positives.size(), strategy.total, "positive");
      bundle.demonstrations = demos_from_hits(positives, top_k(positives, query_vec, strategy.total));
      break;

    case StrategyKind::ContrastiveCot: {
      const std::size_t half = strategy.total / 2;
      require(positives.size(), half, "positive");
      require(negatives.size(), half, "negative");
      bundle.template_id = std::string(kTemplateContrastive);
      bundle.demonstrations = demos_from_hits(positives, top_k(positives, query_vec, half));
      bundle.negative_block = demos_from_hits(negatives, top_k(negatives, query_vec, half));
      break;
    }

    case StrategyKind::RandomFewShot: {
      require(positives.size(), strategy.total, "positive");
      std::vector<std::size_t> order(positives.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng rng(query_seed(strategy.seed, query));
      // Partial Fisher-Yates: the first `total` slots are the sample.
      for (std::size_t i = 0; i < strategy.total; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, order.size() - i));
        std::swap(order[i], order[j]);
        const auto& r = positives[order[i]];
        bundle.demonstrations.push_back(to_demo(r, cosine(r.embedding, query_vec)));
      }
      break;
    }

    case StrategyKind::NegAnchored: {
      require(positives.size(), strategy.total, "positive");
      require(negatives.size(), strategy.n, "negative");
      const auto direct_hits = top_k(positives, query_vec, strategy.m);
      std::vector<Demonstration> direct = demos_from_hits(positives, direct_hits);

      std::vector<Demonstration> anchored;
      if (strategy.n > 0) {
        IdSet used;
        if (!options.allow_duplicates) {
          for (const auto& h : direct_hits) used.insert(h.exemplar_id);
        }
        const auto anchors = top_k(negatives, query_vec, strategy.n);
        std::vector<AnchoredPositive> picked;
        try {
          picked = anchor_positives(anchors, negatives, positives, used,
                                    AnchorOptions{options.allow_duplicates});
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::PositiveStoreEmpty) throw;
          throw Error(ErrorKind::InsufficientCorpus, e.what());
        }
        for (const auto& a : picked) {
          anchored.push_back(to_demo(find_record(positives, a.positive_id), a.score, a.anchor_id));
        }
      }
      auto& first = options.anchored_first ? anchored : direct;
      auto& second = options.anchored_first ? direct : anchored;
      bundle.demonstrations = std::move(first);
      bundle.demonstrations.insert(bundle.demonstrations.end(), second.begin(), second.end());
      break;
    }
  }
  return bundle;
}

PromptBundle build_bundle(std::string_view query, const CorpusPair& corpora,
                          const StrategyConfig& strategy, const Embedder& embedder,
                          const BundleOptions& options) {
  return build_bundle(query, embedder.embed(query), corpora, strategy, options);
}

std::string render_prompt(const PromptBundle& bundle) {
  std::string out;
  if (bundle.template_id == kTemplateContrastive) {
    std::string text(kContrastiveTemplate);
    const std::string pos = render_block(bundle.demonstrations);
    const std::string neg = bundle.negative_block ? render_block(*bundle.negative_block) : std::string();
    // The negative slot sits after the positive one, so replace it first.
    text.replace(text.find(kNegativeSlot), kNegativeSlot.size(), neg);
    text.replace(text.find(kPositiveSlot), kPositiveSlot.size(), pos);
    out = std::move(text);
    out += "\n\n";
  } else {
    for (const auto& d : bundle.demonstrations) out += render_demonstration(d.question, d.rationale, d.answer);
  }
  out += render_query(bundle.query);
  return out;
}

}  // namespace neganchor
