#include <algorithm>

#include "doctest.h"
#include "neganchor/error.hpp"
#include "neganchor/retrieval.hpp"
#include "test_support.hpp"

using namespace neganchor;

namespace {

std::vector<ExemplarRecord> random_store(std::mt19937_64& gen, const std::string& prefix, std::size_t n,
                                         std::size_t dim, Polarity polarity) {
  std::vector<ExemplarRecord> store;
  for (std::size_t i = 0; i < n; ++i) store.push_back(testsupport::random_record(gen, prefix, i, dim, polarity));
  // Shuffle so store order carries no information about ids.
  std::shuffle(store.begin(), store.end(), gen);
  return store;
}

double dotn(const EmbeddingVector& a, const EmbeddingVector& b) {
  double s = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    s += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  return s / std::sqrt(na * nb);
}

// Full sort of every eligible record, then truncate.
std::vector<std::string> sort_oracle(const std::vector<ExemplarRecord>& store, const EmbeddingVector& q,
                                     std::size_t k, const IdSet& exclude = {}) {
  std::vector<std::pair<double, std::string>> all;
  for (const auto& r : store) {
    if (!exclude.contains(r.id)) all.emplace_back(dotn(r.embedding, q), r.id);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

std::vector<std::string> ids(const std::vector<RetrievalHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.exemplar_id);
  return out;
}

// Greedy anchor oracle: walk anchors in order, scan all positives.
std::vector<std::pair<std::string, std::string>> anchor_oracle(const std::vector<std::string>& anchors,
                                                               const std::vector<ExemplarRecord>& negatives,
                                                               const std::vector<ExemplarRecord>& positives,
                                                               IdSet used) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : anchors) {
    const auto& neg = *std::find_if(negatives.begin(), negatives.end(), [&](const auto& r) { return r.id == a; });
    const auto best = sort_oracle(positives, neg.embedding, 1, used);
    if (best.empty()) return {};
    used.insert(best[0]);
    out.emplace_back(a, best[0]);
  }
  return out;
}

ExemplarRecord rec(const std::string& id, std::vector<double> v, Polarity p = Polarity::Positive) {
  ExemplarRecord r;
  r.id = id;
  r.question = id;
  r.embedding = EmbeddingVector{std::move(v)};
  r.polarity = p;
  return r;
}

}  // namespace

TEST_CASE("degenerate k") {
  std::mt19937_64 gen(1);
  const auto store = random_store(gen, "p", 5, 4, Polarity::Positive);
  const auto q = testsupport::random_unit(gen, 4);
  CHECK(top_k(store, q, 0).empty());
  const auto all = top_k(store, q, 50, IdSet{"p0002"});
  CHECK(all.size() == 4);
  CHECK(ids(all) == sort_oracle(store, q, 50, IdSet{"p0002"}));
}

TEST_CASE("ties break by ascending id") {
  const std::vector<ExemplarRecord> store{rec("c", {1, 0}), rec("a", {1, 0}), rec("b", {0, 1}), rec("d", {2, 0})};
  CHECK(ids(top_k(store, EmbeddingVector{{1, 0}}, 3)) == std::vector<std::string>{"a", "c", "d"});
}

TEST_CASE("top_k agrees with a full-sort oracle on random stores") {
  std::mt19937_64 gen(404);
  for (int trial = 0; trial < 200; ++trial) {
    const auto store = random_store(gen, "r", 64, 16, Polarity::Positive);
    const auto q = testsupport::random_unit(gen, 16);
    const auto hits = top_k(store, q, 5);
    CHECK(ids(hits) == sort_oracle(store, q, 5));
    // Prefix property: top-(k-1) is a prefix of top-k.
    const auto shorter = top_k(store, q, 4);
    CHECK(std::equal(shorter.begin(), shorter.end(), hits.begin()));
  }
}

TEST_CASE("ranking is invariant to positive score scaling") {
  std::mt19937_64 gen(12);
  const auto store = random_store(gen, "s", 20, 8, Polarity::Positive);
  const auto q = testsupport::random_unit(gen, 8);
  std::vector<RetrievalHit> all;
  for (const auto& r : store) all.push_back({r.id, cosine(r.embedding, q)});
  all.push_back({"tie", all.front().score});
  const auto base = ids(rank_hits(all, 6));
  for (double factor : {0.25, 3.0, 1000.0}) {
    auto scaled = all;
    for (auto& h : scaled) h.score *= factor;
    CHECK(ids(rank_hits(scaled, 6)) == base);
  }
  CHECK(ids(top_k(store, q, 6)) == ids(rank_hits(std::vector<RetrievalHit>(all.begin(), all.end() - 1), 6)));
}

TEST_CASE("identical embedding is picked with score 1") {
  const std::vector<ExemplarRecord> pos{rec("p1", {0.6, 0.8}), rec("p2", {1, 0})};
  const std::vector<ExemplarRecord> neg{rec("n1", {0.6, 0.8}, Polarity::Negative)};
  const std::vector<RetrievalHit> anchors{{"n1", 0.5}};
  const auto got = anchor_positives(anchors, neg, pos, {});
  REQUIRE(got.size() == 1);
  CHECK(got[0].positive_id == "p1");
  CHECK(got[0].anchor_id == "n1");
  CHECK(got[0].score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("second anchor with the same nearest positive takes the next one") {
  const std::vector<ExemplarRecord> pos{rec("p1", {1, 0}), rec("p2", {0.8, 0.6}), rec("p3", {0, 1})};
  const std::vector<ExemplarRecord> neg{rec("n1", {1, 0.05}, Polarity::Negative),
                                        rec("n2", {1, -0.05}, Polarity::Negative)};
  const std::vector<RetrievalHit> anchors{{"n1", 0.9}, {"n2", 0.8}};
  const auto got = anchor_positives(anchors, neg, pos, {});
  REQUIRE(got.size() == 2);
  CHECK(got[0].positive_id == "p1");
  CHECK(got[1].positive_id == "p2");
  const auto dup = anchor_positives(anchors, neg, pos, {}, AnchorOptions{true});
  CHECK(dup[1].positive_id == "p1");
}

TEST_CASE("anchor errors") {
  const std::vector<ExemplarRecord> pos{rec("p1", {1, 0})};
  const std::vector<ExemplarRecord> neg{rec("n1", {1, 0}, Polarity::Negative), rec("n2", {0, 1}, Polarity::Negative)};
  auto kind = [&](const std::vector<RetrievalHit>& anchors, const IdSet& used) {
    try {
      anchor_positives(anchors, neg, pos, used);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind({{"zz", 0.0}}, {}) == ErrorKind::ParameterInvalid);
  CHECK(kind({{"n1", 0.0}, {"n2", 0.0}}, {}) == ErrorKind::PositiveStoreEmpty);
  CHECK(kind({{"n1", 0.0}}, IdSet{"p1"}) == ErrorKind::PositiveStoreEmpty);
}

TEST_CASE("anchor_positives agrees with a greedy oracle") {
  std::mt19937_64 gen(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 2 + gen() % 15;
    const auto pos = random_store(gen, "p", 1 + gen() % 32, dim, Polarity::Positive);
    const auto neg = random_store(gen, "n", 3 + gen() % 20, dim, Polarity::Negative);
    const auto q = testsupport::random_unit(gen, dim);
    const auto anchors = top_k(neg, q, 3);
    IdSet used;
    if (gen() % 2 == 0) used.insert(top_k(pos, q, 1)[0].exemplar_id);
    const auto want = anchor_oracle(ids(anchors), neg, pos, used);
    if (want.empty()) {
      CHECK_THROWS_AS(anchor_positives(anchors, neg, pos, used), Error);
      continue;
    }
    const auto got = anchor_positives(anchors, neg, pos, used);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].anchor_id == want[i].first);
      CHECK(got[i].positive_id == want[i].second);
    }
  }
}
