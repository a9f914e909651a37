// Command-line front end: corpus building, evaluation, sweeps, reports and
// synthetic task generation.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neganchor/error.hpp"
#include "neganchor/harness.hpp"
#include "neganchor/synthetic.hpp"

namespace {

using namespace neganchor;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitProvider = 3;
constexpr int kExitItemErrors = 4;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ProviderUnavailable:
    case ErrorKind::Transport:
    case ErrorKind::RateLimited:
    case ErrorKind::AuthMissing:
      return kExitProvider;
    default:
      return kExitConfig;
  }
}

ExperimentConfig load_config(const std::string& path, const std::string& out_dir) {
  ExperimentConfig config = ExperimentConfig::from_file(path);
  if (!out_dir.empty()) config.output_dir = fs::absolute(out_dir).string();
  return config;
}

void print_summary(const EvalReport& report) {
  std::cerr << "train=" << report.train_size << " test=" << report.test_size
            << " positives=" << report.positives << " negatives=" << report.negatives << '\n';
  for (const auto& r : report.results) {
    if (r.errors + r.fallbacks + r.extraction_failures == 0) continue;
    std::cerr << r.strategy.name() << ": errors=" << r.errors << " fallbacks=" << r.fallbacks
              << " no-answer=" << r.extraction_failures << '\n';
  }
}

int finish(const EvalReport& report, const ExperimentConfig& config, const std::string& stem) {
  const std::string path = write_report(report, config, stem);
  std::cout << render_report(report, ReportFormat::Markdown);
  print_summary(report);
  std::cerr << "report written to " << path << '\n';
  return report.has_errors() ? kExitItemErrors : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negative-anchored demonstration selection for few-shot prompting"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* build = app.add_subcommand("build-corpus", "Build (or load) the positive and negative corpora");
  build->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Evaluate the configured strategies on the test split");
  std::vector<std::string> strategy_override;
  eval->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  eval->add_option("--strategy", strategy_override, "Strategy name, repeatable; replaces the config list");
  eval->add_option("--out-dir", out_dir, "Override the output directory");

  auto* sweep = app.add_subcommand("sweep", "Evaluate NegAnchored(m, total-m) for m = 0..total");
  std::size_t total = 6;
  sweep->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--total", total, "Demonstration budget")->check(CLI::PositiveNumber);
  sweep->add_option("--out-dir", out_dir, "Override the output directory");

  auto* report = app.add_subcommand("report", "Render saved reports as a table");
  std::vector<std::string> report_paths;
  std::string format = "md";
  report->add_option("reports", report_paths, "Report JSON files (one column each)")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "md or csv")->check(CLI::IsMember({"md", "csv"}));

  auto* synth = app.add_subcommand("synth", "Write a synthetic task bundle for offline runs");
  SyntheticParams params;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Bundle directory")->required();
  synth->add_option("--seed", params.seed, "Generator seed");
  synth->add_option("--items", params.n_items, "Number of items");
  synth->add_option("--dim", params.dim, "Embedding dimension");
  synth->add_option("--concepts", params.n_concepts, "Number of concepts");
  synth->add_option("--hard", params.n_hard, "Number of hard concepts");
  synth->add_option("--theta", params.theta, "Similarity threshold of the mock model");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) {
      ExperimentConfig config = load_config(config_path, "");
      if (config.corpus_path.empty()) {
        config.corpus_path = (fs::path(config.resolve(config.output_dir)) / "corpus.jsonl").string();
      }
      const Providers providers = make_providers(config);
      const PreparedRun run = prepare_run(config, providers);
      std::cout << "train=" << run.train_ids.size() << " test=" << run.test_ids.size()
                << " positives=" << run.corpora.positives.size()
                << " negatives=" << run.corpora.negatives.size() << '\n'
                << "corpus: " << config.resolve(config.corpus_path) << '\n';
      return kExitOk;
    }
    if (*eval) {
      ExperimentConfig config = load_config(config_path, out_dir);
      if (!strategy_override.empty()) {
        config.strategies.clear();
        for (const auto& name : strategy_override) {
          config.strategies.push_back(StrategyConfig::parse(name, config.seeds.random_baseline));
        }
      }
      const Providers providers = make_providers(config);
      return finish(run_experiment(config, providers), config, "eval");
    }
    if (*sweep) {
      const ExperimentConfig config = load_config(config_path, out_dir);
      const Providers providers = make_providers(config);
      return finish(sweep_mn(config, total, providers), config, "sweep-" + std::to_string(total));
    }
    if (*report) {
      std::vector<EvalReport> reports;
      for (const auto& p : report_paths) reports.push_back(EvalReport::from_file(p));
      std::cout << render_report(reports, format == "csv" ? ReportFormat::Csv : ReportFormat::Markdown);
      return kExitOk;
    }
    if (*synth) {
      const SyntheticTask task = generate_synthetic_task(params);
      write_synthetic_bundle(task, synth_out);
      std::cout << "wrote " << task.items.size() << " items to " << synth_out << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
