#include "neganchor/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "neganchor/clustering.hpp"
#include "neganchor/error.hpp"
#include "neganchor/synthetic.hpp"

namespace neganchor {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::chrono::milliseconds seconds_to_ms(double s) {
  return std::chrono::milliseconds(static_cast<long long>(s * 1000.0));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::ConfigInvalid, why); };
  if (dataset_path.empty()) fail("dataset.path is required");
  if (cluster_k < 1) fail("cluster_k must be >= 1");
  if (strategies.empty()) fail("strategies must not be empty");
  if (max_in_flight < 1) fail("max_in_flight must be >= 1");
  if (task_family.kind == FamilyKind::MultipleChoice && task_family.choice_letters.empty()) {
    fail("multiple_choice needs choice_letters");
  }
  if (task_family.kind != FamilyKind::MultipleChoice && !task_family.choice_letters.empty()) {
    fail("choice_letters only apply to multiple_choice");
  }
  for (const auto& s : strategies) s.validate();
  static const std::set<std::string> embed_kinds{"hashing", "lookup", "remote"};
  static const std::set<std::string> llm_kinds{"scripted", "threshold", "remote"};
  if (!embed_kinds.contains(embedding.kind)) fail("unknown embedding kind '" + embedding.kind + "'");
  if (!llm_kinds.contains(llm.kind)) fail("unknown llm kind '" + llm.kind + "'");
  if (embedding.kind == "lookup" && embedding.table.empty()) fail("lookup embedding needs a table");
  if (embedding.kind == "remote" && (embedding.url.empty() || embedding.dim == 0)) {
    fail("remote embedding needs url and dim");
  }
  if ((llm.kind == "scripted" || llm.kind == "threshold") && llm.script.empty()) {
    fail(llm.kind + " llm needs a script");
  }
  if (llm.kind == "threshold" && embedding.kind != "lookup") {
    fail("threshold llm needs the lookup embedding provider");
  }
}

std::string ExperimentConfig::resolve(const std::string& path) const {
  if (path.empty()) return path;
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base_dir) / p).lexically_normal().string();
}

ExperimentConfig ExperimentConfig::from_json(const json& doc, const std::string& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    const json& ds = doc.at("dataset");
    c.dataset_path = ds.at("path").get<std::string>();
    c.dataset_name = ds.value("name", fs::path(c.dataset_path).stem().string());

    const json& fam = doc.at("task_family");
    c.task_family.kind = family_kind_from_string(fam.at("kind").get<std::string>());
    if (c.task_family.kind == FamilyKind::MultipleChoice) {
      c.task_family = TaskFamily::multiple_choice(fam.value("choice_letters", std::string("ABCDE")));
    }

    c.cluster_k = doc.at("cluster_k").get<std::size_t>();
    c.kmeans_max_iters = doc.value("kmeans_max_iters", 100);
    if (doc.contains("seeds")) {
      const json& s = doc.at("seeds");
      c.seeds.split = s.value("split", std::uint64_t{0});
      c.seeds.random_baseline = s.value("random_baseline", std::uint64_t{0});
      c.seeds.kmeans = s.value("kmeans", std::uint64_t{0});
    }
    for (const auto& name : doc.at("strategies")) {
      c.strategies.push_back(StrategyConfig::parse(name.get<std::string>(), c.seeds.random_baseline));
    }
    if (doc.contains("embedding")) {
      const json& e = doc.at("embedding");
      c.embedding.kind = e.value("kind", c.embedding.kind);
      c.embedding.dim = e.value("dim", c.embedding.dim);
      c.embedding.table = e.value("table", std::string());
      c.embedding.url = e.value("url", std::string());
      c.embedding.model = e.value("model", std::string());
      c.embedding.timeout_s = e.value("timeout_s", c.embedding.timeout_s);
      c.embedding.retries = e.value("retries", c.embedding.retries);
      c.embedding.max_in_flight = e.value("max_in_flight", c.embedding.max_in_flight);
    }
    if (doc.contains("llm")) {
      const json& l = doc.at("llm");
      c.llm.kind = l.value("kind", c.llm.kind);
      c.llm.script = l.value("script", std::string());
      c.llm.url = l.value("url", c.llm.url);
      c.llm.model = l.value("model", c.llm.model);
      c.llm.timeout_s = l.value("timeout_s", c.llm.timeout_s);
      c.llm.retries = l.value("retries", c.llm.retries);
      c.llm.temperature = l.value("temperature", c.llm.temperature);
      c.llm.max_tokens = l.value("max_tokens", c.llm.max_tokens);
      c.llm.call_log = l.value("call_log", std::string());
    }
    c.corpus_path = doc.value("corpus_path", std::string());
    c.output_dir = doc.value("output_dir", c.output_dir);
    c.bundle.allow_duplicates = doc.value("allow_duplicates", false);
    c.bundle.anchored_first = doc.value("anchored_first", false);
    c.max_in_flight = doc.value("max_in_flight", c.max_in_flight);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, path + ": " + e.what());
  }
  const fs::path parent = fs::path(path).parent_path();
  return from_json(doc, parent.empty() ? "." : parent.string());
}

json ExperimentConfig::to_json() const {
  json strategy_names = json::array();
  for (const auto& s : strategies) strategy_names.push_back(s.name());
  json family = {{"kind", to_string(task_family.kind)}};
  if (!task_family.choice_letters.empty()) family["choice_letters"] = task_family.choice_letters;
  return {{"dataset", {{"path", dataset_path}, {"name", dataset_name}}},
          {"task_family", family},
          {"cluster_k", cluster_k},
          {"kmeans_max_iters", kmeans_max_iters},
          {"seeds", {{"split", seeds.split}, {"random_baseline", seeds.random_baseline}, {"kmeans", seeds.kmeans}}},
          {"strategies", strategy_names},
          {"embedding",
           {{"kind", embedding.kind},
            {"dim", embedding.dim},
            {"table", embedding.table},
            {"url", embedding.url},
            {"model", embedding.model},
            {"timeout_s", embedding.timeout_s},
            {"retries", embedding.retries},
            {"max_in_flight", embedding.max_in_flight}}},
          {"llm",
           {{"kind", llm.kind},
            {"script", llm.script},
            {"url", llm.url},
            {"model", llm.model},
            {"timeout_s", llm.timeout_s},
            {"retries", llm.retries},
            {"temperature", llm.temperature},
            {"max_tokens", llm.max_tokens},
            {"call_log", llm.call_log}}},
          {"corpus_path", corpus_path},
          {"output_dir", output_dir},
          {"allow_duplicates", bundle.allow_duplicates},
          {"anchored_first", bundle.anchored_first},
          {"max_in_flight", max_in_flight}};
}

Providers make_providers(const ExperimentConfig& config, std::shared_ptr<HttpTransport> transport) {
  Providers providers;
  const auto& e = config.embedding;
  if (e.kind == "hashing") {
    providers.embedder = std::make_shared<HashingEmbedder>(e.dim);
  } else if (e.kind == "lookup") {
    providers.embedder = std::make_shared<LookupEmbedder>(LookupEmbedder::from_file(config.resolve(e.table)));
  } else {
    RemoteEmbedderConfig rc{e.url, e.model, e.dim, seconds_to_ms(e.timeout_s), RetryPolicy{}, e.max_in_flight};
    rc.retry.max_retries = e.retries;
    providers.embedder = std::make_shared<RemoteEmbedder>(std::move(rc), transport);
  }

  std::shared_ptr<CallLog> log;
  if (!config.llm.call_log.empty()) log = std::make_shared<CallLog>(config.resolve(config.llm.call_log));
  const auto& l = config.llm;
  if (l.kind == "scripted") {
    providers.llm = std::make_shared<ScriptedGateway>(ScriptedBehavior::from_file(config.resolve(l.script)), log);
  } else if (l.kind == "threshold") {
    providers.llm = std::make_shared<ThresholdGateway>(ThresholdScript::from_file(config.resolve(l.script)),
                                                       providers.embedder);
  } else {
    RemoteGatewayConfig rc{l.url, l.model, seconds_to_ms(l.timeout_s), RetryPolicy{}, config.max_in_flight};
    rc.retry.max_retries = l.retries;
    providers.llm = std::make_shared<RemoteGateway>(std::move(rc), transport, real_sleeper(), log);
  }
  return providers;
}

// ---------------------------------------------------------------------------
// Running

PreparedRun prepare_run(const ExperimentConfig& config, const Providers& providers) {
  config.validate();
  PreparedRun run;
  run.items = load_dataset(config.resolve(config.dataset_path));
  if (run.items.empty()) throw Error(ErrorKind::ConfigInvalid, "dataset is empty");

  std::vector<std::string> questions;
  questions.reserve(run.items.size());
  for (const auto& item : run.items) questions.push_back(item.question);
  run.vectors = providers.embedder->embed_batch(questions);

  const KMeansResult km = kmeans(run.vectors, config.cluster_k, config.seeds.kmeans, config.kmeans_max_iters);
  run.clusters = km.assignments;
  std::vector<ClusterAssignment> assignments;
  for (std::size_t i = 0; i < run.items.size(); ++i) assignments.push_back({run.items[i].id, km.assignments[i]});
  SplitResult split = split_per_cluster(assignments, config.seeds.split);
  run.train_ids = std::move(split.train_ids);
  run.test_ids = std::move(split.test_ids);

  const std::string corpus_file = config.resolve(config.corpus_path);
  if (!corpus_file.empty() && fs::exists(corpus_file)) {
    run.corpora = load_corpus(corpus_file, providers.embedder->descriptor());
    return run;
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < run.items.size(); ++i) index[run.items[i].id] = i;
  std::vector<TrainItem> train;
  for (const auto& id : run.train_ids) {
    const auto i = index.at(id);
    train.push_back({id, run.items[i].question, run.items[i].answer, run.clusters[i]});
  }
  CorpusBuildOptions options;
  options.dataset = config.dataset_name;
  options.model = config.llm.model;
  options.max_in_flight = config.max_in_flight;
  if (!corpus_file.empty()) options.checkpoint_path = corpus_file + ".checkpoint";
  run.corpora = build_corpora(train, *providers.llm, *providers.embedder, config.task_family,
                              config.seeds.split, options);
  if (!corpus_file.empty()) {
    if (fs::path(corpus_file).has_parent_path()) fs::create_directories(fs::path(corpus_file).parent_path());
    save_corpus(run.corpora, corpus_file);
  }
  return run;
}

namespace {

struct PendingRow {
  TraceRow row;
  std::size_t strategy_index = 0;
  std::optional<std::size_t> request;
  NormalizedAnswer gold;
};

EvalReport evaluate(const ExperimentConfig& config, const Providers& providers, const PreparedRun& run) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < run.items.size(); ++i) index[run.items[i].id] = i;

  std::vector<NormalizedAnswer> golds;
  for (const auto& id : run.test_ids) golds.push_back(normalize_gold(run.items[index.at(id)].answer, config.task_family));

  std::vector<PendingRow> rows;
  std::vector<CompletionRequest> requests;
  std::vector<StrategyResult> results;

  for (std::size_t s = 0; s < config.strategies.size(); ++s) {
    const StrategyConfig& strategy = config.strategies[s];
    StrategyResult result;
    result.strategy = strategy;

    StrategyConfig effective = strategy;
    std::string fallback_flag;
    if (run.corpora.negatives.empty()) {
      if (strategy.kind == StrategyKind::NegAnchored && strategy.n > 0) {
        effective = StrategyConfig::neg_anchored(strategy.total, 0);
      } else if (strategy.kind == StrategyKind::ContrastiveCot) {
        effective = StrategyConfig::similarity(strategy.total);
      }
      if (!(effective == strategy)) fallback_flag = "fallback:" + effective.name();
    }

    for (std::size_t t = 0; t < run.test_ids.size(); ++t) {
      const auto& item = run.items[index.at(run.test_ids[t])];
      PendingRow pending;
      pending.strategy_index = s;
      pending.gold = golds[t];
      pending.row.query_id = item.id;
      pending.row.strategy = strategy.name();
      if (!fallback_flag.empty()) {
        pending.row.flags.push_back(fallback_flag);
        ++result.fallbacks;
      }
      try {
        const PromptBundle bundle =
            build_bundle(item.question, run.vectors[index.at(item.id)], run.corpora, effective, config.bundle);
        for (const auto& d : bundle.demonstrations) pending.row.demonstration_ids.push_back(d.id);
        if (bundle.negative_block) {
          for (const auto& d : *bundle.negative_block) pending.row.demonstration_ids.push_back(d.id);
        }
        pending.request = requests.size();
        requests.push_back({render_prompt(bundle), config.llm.model, config.llm.temperature, config.llm.max_tokens});
      } catch (const Error& e) {
        pending.row.flags.push_back("error:" + std::string(to_string(e.kind())));
      }
      rows.push_back(std::move(pending));
    }
    results.push_back(result);
  }

  const auto outcomes = providers.llm->complete_batch(requests, config.max_in_flight);

  for (auto& pending : rows) {
    StrategyResult& result = results[pending.strategy_index];
    ++result.total;
    TraceRow& row = pending.row;
    if (!pending.request) {
      ++result.errors;
      continue;
    }
    const CompletionOutcome& outcome = outcomes[*pending.request];
    if (!outcome.ok()) {
      row.flags.push_back("error:" + std::string(to_string(outcome.error->kind())));
      ++result.errors;
      continue;
    }
    row.raw_output = outcome.text;
    if (auto predicted = try_extract(outcome.text, config.task_family)) {
      row.extracted = predicted->value;
      row.correct = is_correct(*predicted, pending.gold);
      if (row.correct) ++result.correct;
    } else {
      row.flags.push_back("no-answer");
      ++result.extraction_failures;
    }
  }
  for (auto& r : results) {
    r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const PendingRow& a, const PendingRow& b) {
    if (a.row.query_id != b.row.query_id) return a.row.query_id < b.row.query_id;
    return a.strategy_index < b.strategy_index;
  });

  EvalReport report;
  report.dataset = config.dataset_name;
  report.generated_at = utc_timestamp();
  report.config = config.to_json();
  report.train_size = run.train_ids.size();
  report.test_size = run.test_ids.size();
  report.positives = run.corpora.positives.size();
  report.negatives = run.corpora.negatives.size();
  report.results = std::move(results);
  report.trace.reserve(rows.size());
  for (auto& p : rows) report.trace.push_back(std::move(p.row));
  return report;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& config, const Providers& providers) {
  const PreparedRun run = prepare_run(config, providers);
  return evaluate(config, providers, run);
}

EvalReport sweep_mn(const ExperimentConfig& config, std::size_t total, const Providers& providers) {
  if (total < 1) throw Error(ErrorKind::ConfigInvalid, "sweep total must be >= 1");
  ExperimentConfig sweep = config;
  sweep.strategies.clear();
  for (std::size_t m = 0; m <= total; ++m) sweep.strategies.push_back(StrategyConfig::neg_anchored(m, total - m));
  EvalReport report = run_experiment(sweep, providers);
  report.kind = "sweep";
  return report;
}

// ---------------------------------------------------------------------------
// Reports

bool EvalReport::has_errors() const {
  return std::any_of(results.begin(), results.end(), [](const StrategyResult& r) { return r.errors > 0; });
}

json EvalReport::to_json() const {
  json res = json::array();
  for (const auto& r : results) {
    res.push_back({{"strategy", r.strategy.name()},
                   {"display", r.strategy.display_name()},
                   {"m", r.strategy.m},
                   {"n", r.strategy.n},
                   {"total", r.strategy.total},
                   {"correct", r.correct},
                   {"items", r.total},
                   {"extraction_failures", r.extraction_failures},
                   {"errors", r.errors},
                   {"fallbacks", r.fallbacks},
                   {"accuracy", r.accuracy}});
  }
  json rows = json::array();
  for (const auto& t : trace) {
    rows.push_back({{"query_id", t.query_id},
                    {"strategy", t.strategy},
                    {"demonstration_ids", t.demonstration_ids},
                    {"raw_output", t.raw_output},
                    {"extracted", t.extracted},
                    {"correct", t.correct},
                    {"flags", t.flags}});
  }
  return {{"kind", kind},
          {"dataset", dataset},
          {"generated_at", generated_at},
          {"config", config},
          {"counts", {{"train", train_size}, {"test", test_size}, {"positives", positives}, {"negatives", negatives}}},
          {"results", std::move(res)},
          {"trace", std::move(rows)}};
}

EvalReport EvalReport::from_json(const json& doc) {
  EvalReport report;
  try {
    report.kind = doc.value("kind", std::string("table"));
    report.dataset = doc.at("dataset").get<std::string>();
    report.generated_at = doc.value("generated_at", std::string());
    report.config = doc.value("config", json::object());
    const json& counts = doc.at("counts");
    report.train_size = counts.at("train").get<std::size_t>();
    report.test_size = counts.at("test").get<std::size_t>();
    report.positives = counts.at("positives").get<std::size_t>();
    report.negatives = counts.at("negatives").get<std::size_t>();
    std::uint64_t random_seed = 0;
    if (report.config.contains("seeds")) random_seed = report.config["seeds"].value("random_baseline", std::uint64_t{0});
    for (const auto& r : doc.at("results")) {
      StrategyResult result;
      result.strategy = StrategyConfig::parse(r.at("strategy").get<std::string>(), random_seed);
      result.correct = r.at("correct").get<std::size_t>();
      result.total = r.at("items").get<std::size_t>();
      result.extraction_failures = r.value("extraction_failures", std::size_t{0});
      result.errors = r.value("errors", std::size_t{0});
      result.fallbacks = r.value("fallbacks", std::size_t{0});
      result.accuracy = r.at("accuracy").get<double>();
      report.results.push_back(result);
    }
    for (const auto& t : doc.value("trace", json::array())) {
      TraceRow row;
      row.query_id = t.at("query_id").get<std::string>();
      row.strategy = t.at("strategy").get<std::string>();
      row.demonstration_ids = t.at("demonstration_ids").get<std::vector<std::string>>();
      row.raw_output = t.at("raw_output").get<std::string>();
      row.extracted = t.at("extracted").get<std::string>();
      row.correct = t.at("correct").get<bool>();
      row.flags = t.at("flags").get<std::vector<std::string>>();
      report.trace.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("bad report: ") + e.what());
  }
  return report;
}

EvalReport EvalReport::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open report " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, path + ": " + e.what());
  }
}

std::string format_accuracy(double accuracy) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", accuracy * 100.0);
  return buf;
}

std::string render_report(const std::vector<EvalReport>& reports, ReportFormat format) {
  const bool sweep = !reports.empty() && std::all_of(reports.begin(), reports.end(),
                                                      [](const EvalReport& r) { return r.kind == "sweep"; });
  std::vector<std::string> row_keys;
  std::map<std::string, std::string> labels;
  for (const auto& report : reports) {
    for (const auto& r : report.results) {
      const std::string key = r.strategy.name();
      if (labels.contains(key)) continue;
      row_keys.push_back(key);
      labels[key] = sweep ? "m=" + std::to_string(r.strategy.m) + ", n=" + std::to_string(r.strategy.n)
                          : r.strategy.display_name();
    }
  }

  std::vector<std::string> header{sweep ? "Setting" : "Method"};
  for (const auto& report : reports) header.push_back(report.dataset);

  std::vector<std::vector<std::string>> body;
  for (const auto& key : row_keys) {
    std::vector<std::string> cells{labels[key]};
    for (const auto& report : reports) {
      auto it = std::find_if(report.results.begin(), report.results.end(),
                             [&](const StrategyResult& r) { return r.strategy.name() == key; });
      cells.push_back(it == report.results.end() ? "-" : format_accuracy(it->accuracy));
    }
    body.push_back(std::move(cells));
  }

  std::string out;
  if (format == ReportFormat::Csv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
      out += '\n';
    };
    line(header);
    for (const auto& cells : body) line(cells);
    return out;
  }
  auto line = [&](const std::vector<std::string>& cells) {
    out += '|';
    for (const auto& c : cells) out += ' ' + c + " |";
    out += '\n';
  };
  line(header);
  out += "| --- |";
  for (std::size_t i = 1; i < header.size(); ++i) out += " ---: |";
  out += '\n';
  for (const auto& cells : body) line(cells);
  return out;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  return render_report(std::vector<EvalReport>{report}, format);
}

std::string write_report(const EvalReport& report, const ExperimentConfig& config, const std::string& stem) {
  const fs::path dir(config.resolve(config.output_dir));
  fs::create_directories(dir);
  const fs::path json_path = dir / (stem + ".json");
  {
    std::ofstream out(json_path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + json_path.string());
    out << report.to_json().dump(2) << '\n';
  }
  std::ofstream md(dir / (stem + ".md"));
  if (!md) throw Error(ErrorKind::Io, "cannot write report markdown into " + dir.string());
  md << render_report(report, ReportFormat::Markdown);
  return json_path.string();
}

}  // namespace neganchor
