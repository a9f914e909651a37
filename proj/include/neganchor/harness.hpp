#ifndef NEGANCHOR_HARNESS_HPP
#define NEGANCHOR_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "neganchor/answer_extraction.hpp"
#include "neganchor/corpus.hpp"
#include "neganchor/demo_builder.hpp"
#include "neganchor/embedding.hpp"
#include "neganchor/http.hpp"
#include "neganchor/llm_gateway.hpp"
#include "json.hpp"

namespace neganchor {

struct EmbeddingConfig {
  /// "hashing", "lookup" or "remote".
  std::string kind = "hashing";
  std::size_t dim = HashingEmbedder::kDefaultDim;
  std::string table;
  std::string url;
  std::string model;
  double timeout_s = 30.0;
  int retries = 3;
  int max_in_flight = 4;
};

struct LlmConfig {
  /// "scripted", "threshold" or "remote".
  std::string kind = "scripted";
  std::string script;
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  double timeout_s = 30.0;
  int retries = 3;
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
  std::string call_log;
};

struct Seeds {
  std::uint64_t split = 0;
  std::uint64_t random_baseline = 0;
  std::uint64_t kmeans = 0;
};

struct ExperimentConfig {
  std::string dataset_path;
  std::string dataset_name;
  TaskFamily task_family;
  std::size_t cluster_k = 1;
  int kmeans_max_iters = 100;
  Seeds seeds;
  std::vector<StrategyConfig> strategies;
  EmbeddingConfig embedding;
  LlmConfig llm;
  /// Loaded when the file exists, otherwise built and written there.
  std::string corpus_path;
  std::string output_dir = "out";
  BundleOptions bundle;
  int max_in_flight = 4;
  /// Directory relative paths are resolved against (the config file's).
  std::string base_dir = ".";

  /// Throws ConfigInvalid.
  void validate() const;
  std::string resolve(const std::string& path) const;

  static ExperimentConfig from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
  static ExperimentConfig from_file(const std::string& path);
  /// Snapshot with paths as written (base_dir is not serialized).
  nlohmann::json to_json() const;
};

struct Providers {
  std::shared_ptr<const Embedder> embedder;
  std::shared_ptr<LlmGateway> llm;
};

/// Instantiates the configured providers. Remote ones talk through
/// `transport`; the offline kinds never touch it.
Providers make_providers(const ExperimentConfig& config,
                         std::shared_ptr<HttpTransport> transport = make_default_transport());

struct StrategyResult {
  StrategyConfig strategy;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t extraction_failures = 0;
  /// Items whose model call or bundle construction failed (scored wrong).
  std::size_t errors = 0;
  /// Items that ran on a fallback strategy because a store was empty.
  std::size_t fallbacks = 0;
  double accuracy = 0.0;
};

struct TraceRow {
  std::string query_id;
  std::string strategy;
  std::vector<std::string> demonstration_ids;
  std::string raw_output;
  std::string extracted;
  bool correct = false;
  /// "fallback:<strategy>", "no-answer", "error:<Kind>".
  std::vector<std::string> flags;

  bool operator==(const TraceRow&) const = default;
};

struct EvalReport {
  /// "table" for run_experiment, "sweep" for sweep_mn.
  std::string kind = "table";
  std::string dataset;
  std::string generated_at;
  nlohmann::json config;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<StrategyResult> results;
  /// Sorted by (query id, strategy position in the config).
  std::vector<TraceRow> trace;

  bool has_errors() const;
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& doc);
  static EvalReport from_file(const std::string& path);
};

struct PreparedRun {
  std::vector<DatasetItem> items;
  std::vector<EmbeddingVector> vectors;
  std::vector<std::size_t> clusters;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  CorpusPair corpora;
};

/// Dataset load, embedding, k-means, per-cluster split and corpus
/// build-or-load; the shared front half of every command.
PreparedRun prepare_run(const ExperimentConfig& config, const Providers& providers);

/// Scores every configured strategy on every D_test item. A failing item is
/// isolated: it is flagged, scored incorrect and the run continues.
EvalReport run_experiment(const ExperimentConfig& config, const Providers& providers);

/// NegAnchored(m, total - m) for m = 0..total on one prepared run.
EvalReport sweep_mn(const ExperimentConfig& config, std::size_t total, const Providers& providers);

enum class ReportFormat { Markdown, Csv };

/// Accuracy as a percentage with one decimal ("87.6").
std::string format_accuracy(double accuracy);

/// Strategies as rows, one column per report's dataset ("table" reports),
/// or "m=.., n=.." rows for sweep reports.
std::string render_report(const std::vector<EvalReport>& reports, ReportFormat format);
std::string render_report(const EvalReport& report, ReportFormat format);

/// Writes <stem>.json and <stem>.md into the config's output directory and
/// returns the JSON path.
std::string write_report(const EvalReport& report, const ExperimentConfig& config,
                         const std::string& stem);

}  // namespace neganchor

#endif  // NEGANCHOR_HARNESS_HPP
