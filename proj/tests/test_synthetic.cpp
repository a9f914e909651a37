#include <fstream>
#include <sstream>

#include "doctest.h"
#include "neganchor/demo_builder.hpp"
#include "neganchor/error.hpp"
#include "neganchor/harness.hpp"
#include "neganchor/prompt_format.hpp"
#include "neganchor/synthetic.hpp"
#include "test_support.hpp"

using namespace neganchor;
using testsupport::ScratchDir;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  ScratchDir a("synth-a"), b("synth-b");
  write_synthetic_bundle(generate_synthetic_task({}), a.path().string());
  write_synthetic_bundle(generate_synthetic_task({}), b.path().string());
  for (const char* f : {"dataset.jsonl", "embeddings.json", "mock.json", "config.json"}) {
    CHECK(slurp(a.file(f)) == slurp(b.file(f)));
    CHECK_FALSE(slurp(a.file(f)).empty());
  }
  SyntheticParams other;
  other.seed = 8;
  CHECK(generate_synthetic_task(other).items[0].embedding != generate_synthetic_task({}).items[0].embedding);
}

TEST_CASE("task structure") {
  const auto task = generate_synthetic_task({});
  REQUIRE(task.items.size() == 120);
  CHECK(task.hard_concepts == std::vector<bool>{false, false, false, false, true, true});
  for (std::size_t i = 0; i < task.items.size(); ++i) {
    const auto& item = task.items[i];
    CHECK(item.concept_id == i % 6);
    CHECK(item.embedding.dim() == 32);
    CHECK(l2_norm(item.embedding) == doctest::Approx(1.0));
    if (!task.hard_concepts[item.concept_id]) CHECK(item.easy);
    CHECK(item.gold == std::to_string(100 + 11 * item.concept_id));
  }
  SyntheticParams tiny;
  tiny.n_items = 20;
  CHECK_THROWS_AS(generate_synthetic_task(tiny), Error);
}

TEST_CASE("prompt parsing finds the query and the shown demonstrations") {
  const std::string few = render_demonstration("first question", "r1", "1") +
                          render_demonstration("second question", "", "2") + render_query("the query");
  const auto parsed = parse_prompt_questions(few);
  CHECK(parsed.query == "the query");
  CHECK(parsed.demonstrations == std::vector<std::string>{"first question", "second question"});

  PromptBundle b;
  b.template_id = "contrastive/v1";
  b.query = "the query";
  b.demonstrations.push_back({"p", "positive question", "r", "1", Polarity::Positive, 0, ""});
  b.negative_block = std::vector<Demonstration>{{"n", "negative question", "r", "2", Polarity::Negative, 0, ""}};
  const auto contrastive = parse_prompt_questions(render_prompt(b));
  CHECK(contrastive.query == "the query");
  CHECK(contrastive.demonstrations == std::vector<std::string>{"positive question"});
}

TEST_CASE("threshold rule") {
  const auto task = generate_synthetic_task({});
  auto embedder = std::make_shared<LookupEmbedder>(task.embedder());
  ThresholdGateway gw(ThresholdScript::from_task(task), embedder);
  const SyntheticItem* hard = nullptr;
  const SyntheticItem* easy = nullptr;
  for (const auto& item : task.items) {
    if (!item.easy && !hard) hard = &item;
    if (item.easy && !easy) easy = &item;
  }
  REQUIRE(hard);
  REQUIRE(easy);
  CHECK(gw.would_answer_correctly(easy->question, {}));
  CHECK_FALSE(gw.would_answer_correctly(hard->question, {}));
  // A same-concept demonstration identical to the query clears any threshold.
  CHECK(gw.would_answer_correctly(hard->question, {hard->question}));
  CHECK(gw.complete({render_query(easy->question)}).ends_with("The answer is " + easy->gold + "."));
  CHECK(gw.complete({render_query(hard->question)}).ends_with("The answer is " + hard->wrong + "."));
  CHECK(gw.complete({render_query("unknown")}) == "I cannot tell what is being asked.");
}

TEST_CASE("a single concept makes every strategy score the same") {
  ScratchDir dir("synth-one");
  SyntheticParams p;
  p.n_concepts = 1;
  p.n_items = 30;
  write_synthetic_bundle(generate_synthetic_task(p), dir.path().string());
  const auto config = ExperimentConfig::from_file(dir.file("config.json"));
  const auto report = run_experiment(config, make_providers(config));
  REQUIRE(report.results.size() == 6);
  for (const auto& r : report.results) CHECK(r.accuracy == report.results[0].accuracy);
}

TEST_CASE("reference run renders the golden table") {
  ScratchDir dir("synth-golden");
  write_synthetic_bundle(generate_synthetic_task({}), dir.path().string());
  const auto config = ExperimentConfig::from_file(dir.file("config.json"));
  const auto report = run_experiment(config, make_providers(config));
  CHECK(render_report(report, ReportFormat::Markdown) ==
        slurp(std::string(NEGANCHOR_TEST_DATA) + "/golden/synthetic_reference.md"));
}
