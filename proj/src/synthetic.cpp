#include "neganchor/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "neganchor/error.hpp"
#include "neganchor/random.hpp"
#include "json.hpp"

namespace neganchor {

using nlohmann::json;

namespace {

// Geometry of the generated task, in units of the (unit-norm) concept centre.
constexpr double kItemNoise = 0.05;      // per-coordinate Gaussian sd
constexpr double kHardSpread = 0.3;      // hard items: offset uniform in [-s, s] along u
constexpr double kDecoyOffset = 0.5;     // decoy centre = hard centre + offset * u
constexpr double kEasyBelow = -0.1;      // hard-concept item is easy iff offset < this

constexpr std::string_view kNegativeMarker = "And here is the negative example:";

std::vector<double> gaussian_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string answer_for(std::size_t concept_id) { return std::to_string(100 + 11 * concept_id); }

std::string format_index(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

}  // namespace

void SyntheticParams::validate() const {
  if (n_concepts == 0) throw Error(ErrorKind::ParameterInvalid, "n_concepts must be positive");
  if (n_items < 4 * n_concepts) {
    throw Error(ErrorKind::ParameterInvalid, "n_items must be at least 4 * n_concepts");
  }
  if (dim < 2) throw Error(ErrorKind::ParameterInvalid, "dim must be at least 2");
  if (!(theta > -1.0 && theta < 1.0)) throw Error(ErrorKind::ParameterInvalid, "theta must lie in (-1, 1)");
}

SyntheticTask generate_synthetic_task(const SyntheticParams& params) {
  params.validate();
  Rng rng(params.seed);
  const std::size_t k = params.n_concepts;
  const std::size_t hard = std::min(params.n_hard, k / 2);

  std::vector<std::vector<double>> centres(k);
  for (auto& c : centres) c = normalized(gaussian_vector(rng, params.dim)).values;

  SyntheticTask task;
  task.params = params;
  task.params.n_hard = hard;
  task.hard_concepts.assign(k, false);

  // Hard concept k-hard+j pairs with decoy concept j.
  std::vector<std::vector<double>> axis(k);
  for (std::size_t j = 0; j < hard; ++j) {
    const std::size_t h = k - hard + j;
    task.hard_concepts[h] = true;
    std::vector<double> u = gaussian_vector(rng, params.dim);
    const double along = dot(u, centres[h]);
    for (std::size_t d = 0; d < params.dim; ++d) u[d] -= along * centres[h][d];
    axis[h] = normalized(std::move(u)).values;
    for (std::size_t d = 0; d < params.dim; ++d) {
      centres[j][d] = centres[h][d] + kDecoyOffset * axis[h][d];
    }
  }

  for (std::size_t i = 0; i < params.n_items; ++i) {
    SyntheticItem item;
    item.concept_id = i % k;
    const std::string tag = format_index(i);
    item.id = "syn" + std::to_string(params.seed) + "-" + tag;
    item.question = "Synthetic item " + tag + " (seed " + std::to_string(params.seed) +
                    "): what value does the hidden quantity take?";
    item.gold = answer_for(item.concept_id);
    item.wrong = std::to_string(100 + 11 * item.concept_id + 1);

    std::vector<double> x = centres[item.concept_id];
    if (task.hard_concepts[item.concept_id]) {
      const double offset = (2.0 * uniform_unit(rng) - 1.0) * kHardSpread;
      for (std::size_t d = 0; d < params.dim; ++d) x[d] += offset * axis[item.concept_id][d];
      item.easy = offset < kEasyBelow;
    }
    for (double& v : x) v += kItemNoise * standard_normal(rng);
    item.embedding = normalized(std::move(x));
    task.items.push_back(std::move(item));
  }
  return task;
}

std::vector<DatasetItem> SyntheticTask::dataset() const {
  std::vector<DatasetItem> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back({item.id, item.question, item.gold});
  return out;
}

LookupEmbedder SyntheticTask::embedder() const {
  std::map<std::string, EmbeddingVector, std::less<>> table;
  for (const auto& item : items) table.emplace(item.question, item.embedding);
  return LookupEmbedder("synthetic-seed" + std::to_string(params.seed), params.dim, std::move(table));
}

// ---------------------------------------------------------------------------

ThresholdScript ThresholdScript::from_task(const SyntheticTask& task) {
  ThresholdScript script;
  script.theta = task.params.theta;
  for (const auto& item : task.items) {
    script.by_question.emplace(item.question, Entry{item.concept_id, item.easy, item.gold, item.wrong});
  }
  return script;
}

ThresholdScript ThresholdScript::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open threshold script " + path);
  ThresholdScript script;
  try {
    const json doc = json::parse(in);
    script.theta = doc.at("theta").get<double>();
    for (const auto& e : doc.at("items")) {
      script.by_question.emplace(e.at("question").get<std::string>(),
                                 Entry{e.at("concept").get<std::size_t>(), e.at("easy").get<bool>(),
                                       e.at("gold").get<std::string>(), e.at("wrong").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, path + ": " + e.what());
  }
  return script;
}

void ThresholdScript::save(const std::string& path) const {
  json items = json::array();
  for (const auto& [question, e] : by_question) {
    items.push_back({{"question", question},
                     {"concept", e.concept_id},
                     {"easy", e.easy},
                     {"gold", e.gold},
                     {"wrong", e.wrong}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << json{{"kind", "threshold"}, {"theta", theta}, {"items", std::move(items)}}.dump(1) << '\n';
}

ParsedPrompt parse_prompt_questions(std::string_view prompt) {
  struct Found {
    std::size_t pos;
    std::string text;
  };
  std::vector<Found> found;
  for (std::size_t pos = prompt.find("Q: "); pos != std::string_view::npos; pos = prompt.find("Q: ", pos + 1)) {
    if (pos > 0 && prompt[pos - 1] != '\n' && prompt[pos - 1] != ' ') continue;
    const std::size_t start = pos + 3;
    const std::size_t end = std::min(prompt.find('\n', start), prompt.size());
    found.push_back({pos, std::string(prompt.substr(start, end - start))});
  }
  ParsedPrompt parsed;
  if (found.empty()) return parsed;
  parsed.query = found.back().text;
  const std::size_t negative_from = prompt.find(kNegativeMarker);
  for (std::size_t i = 0; i + 1 < found.size(); ++i) {
    if (negative_from != std::string_view::npos && found[i].pos > negative_from) continue;
    parsed.demonstrations.push_back(found[i].text);
  }
  return parsed;
}

ThresholdGateway::ThresholdGateway(ThresholdScript script, std::shared_ptr<const Embedder> embedder)
    : script_(std::move(script)), embedder_(std::move(embedder)) {}

bool ThresholdGateway::would_answer_correctly(const std::string& query,
                                              const std::vector<std::string>& demonstrations) const {
  const auto q = script_.by_question.find(query);
  if (q == script_.by_question.end()) return false;
  if (q->second.easy) return true;
  const EmbeddingVector query_vec = embedder_->embed(query);
  for (const auto& demo : demonstrations) {
    const auto d = script_.by_question.find(demo);
    if (d == script_.by_question.end() || d->second.concept_id != q->second.concept_id) continue;
    if (cosine(embedder_->embed(demo), query_vec) > script_.theta) return true;
  }
  return false;
}

std::string ThresholdGateway::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw Error(ErrorKind::ParameterInvalid, "empty prompt");
  const ParsedPrompt parsed = parse_prompt_questions(request.prompt);
  const auto q = script_.by_question.find(parsed.query);
  if (q == script_.by_question.end()) return "I cannot tell what is being asked.";
  const bool right = would_answer_correctly(parsed.query, parsed.demonstrations);
  const std::string& value = right ? q->second.gold : q->second.wrong;
  return "Working from the hidden quantity, the value comes out as " + value + ". The answer is " +
         value + ".";
}

void write_synthetic_bundle(const SyntheticTask& task, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  const auto items = task.dataset();
  save_dataset(items, (root / "dataset.jsonl").string());
  task.embedder().save((root / "embeddings.json").string());
  ThresholdScript::from_task(task).save((root / "mock.json").string());

  const auto seed = task.params.seed;
  const json config = {
      {"dataset", {{"path", "dataset.jsonl"}, {"name", "synthetic"}}},
      {"task_family", {{"kind", "numeric"}}},
      {"cluster_k", task.params.n_concepts},
      {"kmeans_max_iters", 100},
      {"seeds", {{"split", seed}, {"random_baseline", seed}, {"kmeans", seed}}},
      {"strategies",
       {"zero-shot-cot", "similarity:2", "contrastive:2", "random:2", "neg-anchored:1,1",
        "neg-anchored:0,2"}},
      {"embedding", {{"kind", "lookup"}, {"table", "embeddings.json"}}},
      {"llm", {{"kind", "threshold"}, {"script", "mock.json"}}},
      {"output_dir", "out"},
      {"max_in_flight", 4}};
  std::ofstream out(root / "config.json");
  if (!out) throw Error(ErrorKind::Io, "cannot write config into " + dir);
  out << config.dump(2) << '\n';
}

}  // namespace neganchor
