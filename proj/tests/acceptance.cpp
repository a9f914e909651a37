// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Oracles here are written against the documented rules, not
// against the implementation's internals.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include "json.hpp"
#include "neganchor/answer_extraction.hpp"
#include "neganchor/clustering.hpp"
#include "neganchor/corpus.hpp"
#include "neganchor/demo_builder.hpp"
#include "neganchor/error.hpp"
#include "neganchor/harness.hpp"
#include "neganchor/prompt_format.hpp"
#include "neganchor/random.hpp"
#include "neganchor/retrieval.hpp"
#include "neganchor/synthetic.hpp"
#include "test_support.hpp"

using namespace neganchor;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Failure {
  std::string why;
};

void expect(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Brute-force oracles

// Every eligible record scored, fully sorted (score desc, id asc), truncated.
std::vector<std::string> linear_scan(const std::vector<ExemplarRecord>& store, const EmbeddingVector& q,
                                     std::size_t k, const std::set<std::string>& exclude = {}) {
  std::vector<std::pair<double, std::string>> all;
  for (const auto& r : store) {
    if (!exclude.contains(r.id)) all.emplace_back(cosine(r.embedding, q), r.id);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

const ExemplarRecord& by_id(const std::vector<ExemplarRecord>& store, const std::string& id) {
  return *std::find_if(store.begin(), store.end(), [&](const ExemplarRecord& r) { return r.id == id; });
}

// Anchors in order; each takes its nearest still-unused positive.
std::vector<std::string> greedy_anchor(const std::vector<std::string>& anchors,
                                       const std::vector<ExemplarRecord>& negatives,
                                       const std::vector<ExemplarRecord>& positives, std::set<std::string> used) {
  std::vector<std::string> out;
  for (const auto& a : anchors) {
    const auto best = linear_scan(positives, by_id(negatives, a).embedding, 1, used);
    if (best.empty()) return {};
    used.insert(best[0]);
    out.push_back(best[0]);
  }
  return out;
}

std::vector<ExemplarRecord> random_store(std::mt19937_64& gen, const std::string& prefix, std::size_t n,
                                         std::size_t dim, Polarity polarity, bool coarse) {
  std::vector<ExemplarRecord> store;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = testsupport::random_record(gen, prefix, i, dim, polarity);
    if (coarse) {
      // Few distinct directions, so exact score ties are common.
      for (double& x : r.embedding.values) x = static_cast<double>(static_cast<int>(gen() % 3) - 1);
      if (l2_norm(r.embedding) == 0.0) r.embedding.values[0] = 1.0;
      r.embedding = normalized(r.embedding.values);
    }
    store.push_back(std::move(r));
  }
  std::shuffle(store.begin(), store.end(), gen);
  return store;
}

std::vector<std::string> hit_ids(const std::vector<RetrievalHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.exemplar_id);
  return out;
}

// ---------------------------------------------------------------------------
// Criteria

void retrieval_oracle() {
  std::mt19937_64 gen(20240601);
  for (int trial = 0; trial < 200; ++trial) {
    const bool coarse = trial % 2 == 1;
    const std::size_t dim = 1 + gen() % 16;
    const auto pos = random_store(gen, "p", 1 + gen() % 64, dim, Polarity::Positive, coarse);
    const auto neg = random_store(gen, "n", 1 + gen() % 64, dim, Polarity::Negative, coarse);
    EmbeddingVector q = testsupport::random_unit(gen, dim);
    if (coarse) q = pos[gen() % pos.size()].embedding;
    const std::size_t k = gen() % 9;
    std::set<std::string> exclude;
    if (gen() % 3 == 0) exclude.insert(pos[gen() % pos.size()].id);
    const IdSet ex(exclude.begin(), exclude.end());
    expect(hit_ids(top_k(pos, q, k, ex)) == linear_scan(pos, q, k, exclude), "top_k differs from linear scan");

    const auto anchors = top_k(neg, q, 1 + gen() % 3);
    const auto want = greedy_anchor(hit_ids(anchors), neg, pos, exclude);
    std::vector<std::string> got;
    try {
      for (const auto& a : anchor_positives(anchors, neg, pos, ex)) got.push_back(a.positive_id);
    } catch (const Error& e) {
      expect(e.kind() == ErrorKind::PositiveStoreEmpty && want.empty(), "unexpected anchor error");
      continue;
    }
    expect(got == want, "anchor_positives differs from greedy oracle");
  }
}

std::vector<int> best_two_partition(const std::vector<EmbeddingVector>& pts) {
  const std::size_t n = pts.size(), dim = pts[0].dim();
  double best = 1e300;
  std::vector<int> labels;
  for (unsigned mask = 2; mask + 1 < (1u << n); mask += 2) {  // point 0 stays in group 0
    double sse = 0.0;
    for (unsigned g = 0; g < 2; ++g) {
      std::vector<double> mean(dim, 0.0);
      double count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) != g) continue;
        count += 1;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += pts[i].values[d];
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) != g) continue;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = pts[i].values[d] - mean[d] / count;
          sse += diff * diff;
        }
      }
    }
    if (sse < best) {
      best = sse;
      labels.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>((mask >> i) & 1u);
    }
  }
  return labels;
}

void kmeans_properties() {
  std::mt19937_64 gen(777);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 60, dim = 1 + gen() % 8;
    const std::size_t k = 1 + gen() % std::min<std::size_t>(n, 8);
    std::vector<EmbeddingVector> pts(n);
    for (auto& p : pts) {
      p.values.resize(dim);
      for (double& x : p.values) x = nd(gen);
    }
    const auto r = kmeans(pts, k, trial);
    for (std::size_t i = 0; i < n; ++i) {
      const double own = squared_distance(pts[i].values, r.centroids[r.assignments[i]]);
      for (const auto& c : r.centroids) expect(own <= squared_distance(pts[i].values, c), "point not at nearest centroid");
    }
    for (std::size_t s = 1; s < r.sse_history.size(); ++s) {
      expect(r.sse_history[s] <= r.sse_history[s - 1], "SSE increased");
    }
    const auto again = kmeans(pts, k, trial);
    expect(again.assignments == r.assignments && again.centroids == r.centroids, "seeded run not reproducible");
  }
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4 + gen() % 5;
    std::vector<EmbeddingVector> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double cx = (i % 2 == 0) ? 0.0 : 10.0 + trial;
      pts[i].values = {cx + 0.3 * nd(gen), 0.3 * nd(gen)};
    }
    std::shuffle(pts.begin(), pts.end(), gen);
    const auto oracle = best_two_partition(pts);
    const auto got = kmeans(pts, 2, trial).assignments;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        expect((got[i] == got[j]) == (oracle[i] == oracle[j]), "two-blob partition is not SSE-optimal");
      }
    }
  }
}

void split_invariants() {
  std::mt19937_64 gen(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + gen() % 80, clusters = 1 + gen() % 7;
    std::vector<ClusterAssignment> items;
    std::map<std::string, std::size_t> cluster_of;
    for (std::size_t i = 0; i < n; ++i) {
      items.push_back({"x" + std::to_string(gen() % 100000) + "-" + std::to_string(i), gen() % clusters});
      cluster_of[items.back().item_id] = items.back().cluster;
    }
    const auto s = split_per_cluster(items, trial * 31 + 1);
    std::map<std::size_t, std::pair<int, int>> sizes;
    std::set<std::string> seen;
    for (const auto& id : s.train_ids) {
      ++sizes[cluster_of.at(id)].first;
      expect(seen.insert(id).second, "duplicate id in split");
    }
    for (const auto& id : s.test_ids) {
      ++sizes[cluster_of.at(id)].second;
      expect(seen.insert(id).second, "train and test overlap");
    }
    expect(seen.size() == n, "split is not exhaustive");
    for (const auto& [c, tt] : sizes) expect(std::abs(tt.first - tt.second) <= 1, "cluster split unbalanced");
    expect(split_per_cluster(items, trial * 31 + 1) == s, "seeded split not reproducible");
  }
}

void corpus_partition() {
  testsupport::ScratchDir dir("accept-corpus");
  std::mt19937_64 gen(55);
  HashingEmbedder embedder(24);
  for (int trial = 0; trial < 10; ++trial) {
    // Scripted mock: a random subset of items is answered wrong, a few unparsably.
    std::vector<TrainItem> items;
    json rules = json::array();
    const std::size_t n = 5 + gen() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string q = "Trial " + std::to_string(trial) + " item " + std::to_string(i) + ": sum?";
      items.push_back({"i" + std::to_string(1000 + i), q, std::to_string(i), i % 3});
      const int mode = static_cast<int>(gen() % 3);
      const std::string answer = mode == 0 ? "The answer is " + std::to_string(i) + "."
                               : mode == 1 ? "The answer is " + std::to_string(i + 1) + "."
                                           : std::string("I give up.");
      rules.push_back({{"substring", q}, {"response", answer}});
    }
    ScriptedGateway mock(ScriptedBehavior::from_json_text(json{{"rules", rules}, {"default", ""}}.dump()));
    const auto pair = build_corpora(items, mock, embedder, TaskFamily::numeric(), trial);
    expect(pair.positives.size() + pair.negatives.size() == items.size(), "|pos| + |neg| != |train|");
    for (const auto* store : {&pair.positives, &pair.negatives}) {
      for (const auto& r : *store) {
        const auto predicted = try_extract(r.rationale, pair.task_family);
        const bool ok = predicted && is_correct(*predicted, normalize_gold(r.gold, pair.task_family));
        expect(ok == (r.polarity == Polarity::Positive), "polarity not reproduced by is_correct");
      }
    }
  }
  for (int trial = 0; trial < 50; ++trial) {
    CorpusPair pair;
    const std::size_t dim = 1 + gen() % 16;
    pair.provider = {"trigram-hash-v1", dim, ProviderKind::DeterministicTest};
    pair.dataset = "rand" + std::to_string(trial);
    pair.task_family = trial % 2 ? TaskFamily::multiple_choice("ABCD") : TaskFamily::yes_no();
    pair.build_seed = gen();
    pair.built_at = "2026-10-19T00:00:00Z";
    for (std::size_t i = 0, np = gen() % 15; i < np; ++i) {
      pair.positives.push_back(testsupport::random_record(gen, "p", i, dim, Polarity::Positive));
    }
    for (std::size_t i = 0, nn = gen() % 15; i < nn; ++i) {
      auto r = testsupport::random_record(gen, "n", i, dim, Polarity::Negative);
      r.rationale += "\n\"quoted\"\ttab \\ backslash \xC3\xA9";
      r.extraction_failed = i % 4 == 0;
      pair.negatives.push_back(std::move(r));
    }
    const std::string path = dir.file("c" + std::to_string(trial) + ".jsonl");
    save_corpus(pair, path);
    expect(load_corpus(path, pair.provider) == pair, "corpus roundtrip lost information");
  }
}

void strategy_composition() {
  std::mt19937_64 gen(8080);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 2 + gen() % 15;
    CorpusPair c;
    c.provider = {"t", dim, ProviderKind::DeterministicTest};
    for (std::size_t i = 0, n = 12 + gen() % 40; i < n; ++i) {
      c.positives.push_back(testsupport::random_record(gen, "p", i, dim, Polarity::Positive));
    }
    for (std::size_t i = 0, n = 6 + gen() % 20; i < n; ++i) {
      c.negatives.push_back(testsupport::random_record(gen, "n", i, dim, Polarity::Negative));
    }
    const auto q = testsupport::random_unit(gen, dim);
    for (std::size_t total : {2u, 6u}) {
      for (std::size_t m = 0; m <= total; ++m) {
        const auto b = build_bundle("q", q, c, StrategyConfig::neg_anchored(m, total - m));
        std::set<std::string> ids;
        for (const auto& d : b.demonstrations) {
          expect(d.polarity == Polarity::Positive, "non-positive demonstration");
          ids.insert(d.id);
        }
        expect(b.demonstrations.size() == total && ids.size() == total, "bundle size or distinctness wrong");
      }
      expect(build_bundle("q", q, c, StrategyConfig::neg_anchored(total, 0)).demonstrations ==
                 build_bundle("q", q, c, StrategyConfig::similarity(total)).demonstrations,
             "NegAnchored(t,0) differs from Similarity(t)");
    }
    const auto v11 = build_bundle("q", q, c, StrategyConfig::parse("neg-anchored:1,1"));
    const auto v02 = build_bundle("q", q, c, StrategyConfig::parse("neg-anchored:0,2"));
    expect(v11.demonstrations[0].anchor_id.empty() && !v11.demonstrations[1].anchor_id.empty(),
           "(1,1) is not one direct plus one anchored positive");
    expect(!v02.demonstrations[0].anchor_id.empty() && !v02.demonstrations[1].anchor_id.empty(),
           "(0,2) is not two anchored positives");
  }
}

void contrastive_bytes() {
  // Committed copy of the instruction sentence.
  const std::string instruction =
      "Learn from the positive example and avoid making the mistakes in the negative example";
  CorpusPair c;
  c.provider = {"t", 2, ProviderKind::DeterministicTest};
  ExemplarRecord p, n;
  p.id = "p";
  p.question = "What is 2 + 3?";
  p.rationale = "2 + 3 = 5.";
  p.predicted = "5";
  p.polarity = Polarity::Positive;
  p.embedding = EmbeddingVector{{1, 0}};
  n = p;
  n.id = "n";
  n.rationale = "2 + 3 = 6.";
  n.predicted = "6";
  n.polarity = Polarity::Negative;
  c.positives = {p};
  c.negatives = {n};
  const std::string text =
      render_prompt(build_bundle("What is 4 + 4?", EmbeddingVector{{1, 0}}, c, StrategyConfig::contrastive(2)));
  expect(text.find(instruction) != std::string::npos, "instruction sentence missing");
  const std::string expected =
      "Below is a positive example and a negative example. " + instruction +
      ". Here is the positive example: Q: What is 2 + 3?\nA: 2 + 3 = 5. The answer is 5., And here is the "
      "negative example: Q: What is 2 + 3?\nA: 2 + 3 = 6. The answer is 6.\n\nQ: What is 4 + 4?\nA: Let's think "
      "step by step.";
  expect(text == expected, "contrastive prompt is not byte-identical to the expected rendering");
}

void answer_extraction_suite() {
  std::ifstream in(std::string(NEGANCHOR_TEST_DATA) + "/fixtures/extraction_fixtures.jsonl");
  expect(in.good(), "fixture file missing");
  std::map<std::string, int> count;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto row = json::parse(line);
    TaskFamily family{family_kind_from_string(row.at("family").get<std::string>()), {}};
    if (family.kind == FamilyKind::MultipleChoice) {
      family = TaskFamily::multiple_choice(row.value("choice_letters", "ABCDE"));
    }
    const auto got = try_extract(row.at("raw").get<std::string>(), family);
    const bool ok = row.at("expected").is_null() ? !got : (got && got->value == row.at("expected"));
    expect(ok, "fixture failed: " + row.dump());
    ++count[row.at("family").get<std::string>()];
  }
  for (const char* f : {"numeric", "multiple_choice", "yes_no", "string_exact"}) {
    expect(count[f] >= 40, std::string("fewer than 40 fixtures for ") + f);
  }
  PromptBundle zs;
  zs.template_id = "zero-shot-cot/v1";
  zs.query = "How many legs do 3 spiders have?";
  expect(render_prompt(zs).ends_with("Let's think step by step."), "zero-shot trigger missing");
}

// Counts from the first verified run of the reference synthetic task, in the
// order of the generated config's strategy list.
const std::vector<std::pair<std::string, std::size_t>> kLockedCorrect{
    {"zero-shot-cot", 44}, {"similarity:2", 51},     {"contrastive:2", 51},
    {"random:2", 47},      {"neg-anchored:1,1", 52}, {"neg-anchored:0,2", 52}};
constexpr std::size_t kLockedTestSize = 59;

// Independent simulation of the reference task straight from its geometry.
std::map<std::string, std::size_t> simulate_reference(const SyntheticTask& task, const ExperimentConfig& config,
                                                      std::size_t& test_size) {
  std::vector<EmbeddingVector> vecs;
  std::vector<ClusterAssignment> assign;
  for (const auto& item : task.items) vecs.push_back(item.embedding);
  const auto km = kmeans(vecs, config.cluster_k, config.seeds.kmeans, config.kmeans_max_iters);
  for (std::size_t i = 0; i < task.items.size(); ++i) assign.push_back({task.items[i].id, km.assignments[i]});
  const auto split = split_per_cluster(assign, config.seeds.split);
  test_size = split.test_ids.size();

  std::map<std::string, const SyntheticItem*> item_of;
  for (const auto& item : task.items) item_of[item.id] = &item;
  // Zero-shot corpus build: easy train items are answered right.
  std::vector<ExemplarRecord> pos, neg;
  for (const auto& id : split.train_ids) {
    ExemplarRecord r;
    r.id = id;
    r.embedding = item_of[id]->embedding;
    (item_of[id]->easy ? pos : neg).push_back(r);
  }

  auto answers_right = [&](const SyntheticItem& q, const std::vector<std::string>& demos) {
    if (q.easy) return true;
    for (const auto& d : demos) {
      const auto& di = *item_of[d];
      if (di.concept_id == q.concept_id && cosine(di.embedding, q.embedding) > task.params.theta) return true;
    }
    return false;
  };
  auto random_pick = [&](const std::string& question) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : question) {
      h ^= ch;
      h *= 0x100000001B3ULL;
    }
    Rng rng(config.seeds.random_baseline ^ h);
    std::vector<std::string> ids;
    for (const auto& r : pos) ids.push_back(r.id);
    for (std::size_t i = 0; i < 2; ++i) std::swap(ids[i], ids[i + uniform_below(rng, ids.size() - i)]);
    return std::vector<std::string>{ids[0], ids[1]};
  };

  std::map<std::string, std::size_t> correct;
  for (const auto& id : split.test_ids) {
    const SyntheticItem& q = *item_of[id];
    const auto top_pos = linear_scan(pos, q.embedding, 2);
    const auto top_neg = linear_scan(neg, q.embedding, 2);
    std::map<std::string, std::vector<std::string>> demos;
    demos["zero-shot-cot"] = {};
    demos["similarity:2"] = top_pos;
    demos["contrastive:2"] = {top_pos[0]};
    demos["random:2"] = random_pick(q.question);
    auto one_one = greedy_anchor({top_neg[0]}, neg, pos, {top_pos[0]});
    one_one.insert(one_one.begin(), top_pos[0]);
    demos["neg-anchored:1,1"] = one_one;
    demos["neg-anchored:0,2"] = greedy_anchor(top_neg, neg, pos, {});
    for (const auto& [name, ids] : demos) correct[name] += answers_right(q, ids) ? 1 : 0;
  }
  return correct;
}

void synthetic_end_to_end() {
  testsupport::ScratchDir dir("accept-synth");
  const SyntheticTask task = generate_synthetic_task(SyntheticParams{});
  write_synthetic_bundle(task, dir.path().string());
  const auto config = ExperimentConfig::from_file(dir.file("config.json"));
  const auto report = run_experiment(config, make_providers(config));

  std::size_t oracle_test = 0;
  const auto oracle = simulate_reference(task, config, oracle_test);
  expect(report.test_size == oracle_test && oracle_test == kLockedTestSize, "test split size differs");
  expect(report.results.size() == kLockedCorrect.size(), "unexpected strategy count");
  std::ostringstream summary;
  for (std::size_t i = 0; i < kLockedCorrect.size(); ++i) {
    const auto& [name, locked] = kLockedCorrect[i];
    const auto& r = report.results[i];
    summary << name << "=" << r.correct << "/" << r.total << " ";
    expect(r.strategy.name() == name, "strategy order differs");
    expect(oracle.at(name) == locked, "oracle disagrees with locked value for " + name);
    expect(r.correct == oracle.at(name), "pipeline disagrees with oracle for " + name + ": " +
                                             std::to_string(r.correct) + " vs " + std::to_string(oracle.at(name)));
    expect(r.errors == 0 && r.fallbacks == 0 && r.extraction_failures == 0, "unexpected flags for " + name);
  }
  expect(report.results[4].accuracy > report.results[1].accuracy,
         "NegAnchored(1,1) does not beat Similarity(2): " + summary.str());
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + NEGANCHOR_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json without_timestamp(json report) {
  report.erase("generated_at");
  return report;
}

void determinism() {
  testsupport::ScratchDir dir("accept-det");
  expect(run_cli("synth --out \"" + dir.path().string() + "\"") == 0, "synth failed");
  const std::string config = dir.file("config.json");
  expect(run_cli("eval --config \"" + config + "\"") == 0, "first eval failed");
  const std::string first_json = slurp(dir.file("out/eval.json"));
  const std::string first_md = slurp(dir.file("out/eval.md"));
  expect(run_cli("eval --config \"" + config + "\"") == 0, "second eval failed");
  const std::string second_json = slurp(dir.file("out/eval.json"));
  expect(!first_json.empty(), "no report written");
  expect(without_timestamp(json::parse(first_json)).dump(2) == without_timestamp(json::parse(second_json)).dump(2),
         "reports differ beyond the timestamp");
  expect(first_md == slurp(dir.file("out/eval.md")), "markdown tables differ");
}

void sweep_shape() {
  testsupport::ScratchDir dir("accept-sweep");
  expect(run_cli("synth --out \"" + dir.path().string() + "\"") == 0, "synth failed");
  expect(run_cli("sweep --total 6 --config \"" + dir.file("config.json") + "\"") == 0, "sweep failed");
  const auto report = EvalReport::from_file(dir.file("out/sweep-6.json"));
  expect(report.kind == "sweep" && report.results.size() == 7, "sweep does not have 7 rows");
  for (std::size_t m = 0; m <= 6; ++m) {
    expect(report.results[m].strategy.name() == "neg-anchored:" + std::to_string(m) + "," + std::to_string(6 - m),
           "row order is not m=0..6");
  }
  const std::string md = slurp(dir.file("out/sweep-6.md"));
  std::size_t rows = 0;
  for (std::size_t pos = md.find("| m="); pos != std::string::npos; pos = md.find("| m=", pos + 1)) ++rows;
  expect(rows == 7, "rendered sweep table does not have 7 rows");
  expect(md.find("| m=0, n=6 |") != std::string::npos && md.find("| m=6, n=0 |") != std::string::npos,
         "sweep row labels missing");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void()> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria{
      {"retrieval oracle equivalence (200 random corpora)", retrieval_oracle, 10.0},
      {"k-means properties and two-blob optimality", kmeans_properties, 0.0},
      {"per-cluster split invariants", split_invariants, 0.0},
      {"corpus partition and lossless JSONL roundtrip", corpus_partition, 0.0},
      {"negative-anchored bundle composition", strategy_composition, 0.0},
      {"contrastive template byte-exactness", contrastive_bytes, 0.0},
      {"answer extraction fixtures and zero-shot trigger", answer_extraction_suite, 0.0},
      {"synthetic end-to-end matches the oracle", synthetic_end_to_end, 30.0},
      {"eval determinism across runs", determinism, 0.0},
      {"sweep --total 6 emits 7 rows", sweep_shape, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      c.run();
    } catch (const Failure& f) {
      ok = false;
      detail = f.why;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && c.budget_s > 0.0 && secs > c.budget_s) {
      ok = false;
      detail = "over the " + std::to_string(c.budget_s) + " s budget";
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << " [" << timing << "]";
    if (!ok) std::cout << ": " << detail;
    std::cout << std::endl;
    if (!ok) ++failures;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
