#include "neganchor/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "neganchor/prompt_format.hpp"
#include "json.hpp"

namespace neganchor {

using nlohmann::json;

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::Positive ? "positive" : "negative";
}

namespace {

Polarity polarity_from_string(std::string_view s) {
  if (s == "positive") return Polarity::Positive;
  if (s == "negative") return Polarity::Negative;
  throw Error(ErrorKind::SchemaMismatch, "unknown polarity '" + std::string(s) + "'");
}

std::string id_field(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw Error(ErrorKind::SchemaMismatch, "id must be a string or integer");
}

json record_to_json(const ExemplarRecord& r) {
  return {{"id", r.id},
          {"question", r.question},
          {"rationale", r.rationale},
          {"predicted", r.predicted},
          {"gold", r.gold},
          {"polarity", to_string(r.polarity)},
          {"embedding", r.embedding.values},
          {"cluster", r.cluster},
          {"dataset", r.dataset},
          {"extraction_failed", r.extraction_failed}};
}

ExemplarRecord record_from_json(const json& j) {
  ExemplarRecord r;
  r.id = id_field(j.at("id"));
  r.question = j.at("question").get<std::string>();
  r.rationale = j.at("rationale").get<std::string>();
  r.predicted = j.at("predicted").get<std::string>();
  r.gold = j.at("gold").get<std::string>();
  r.polarity = polarity_from_string(j.at("polarity").get<std::string>());
  r.embedding.values = j.at("embedding").get<std::vector<double>>();
  r.cluster = j.at("cluster").get<std::size_t>();
  r.dataset = j.at("dataset").get<std::string>();
  r.extraction_failed = j.value("extraction_failed", false);
  return r;
}

json family_to_json(const TaskFamily& f) {
  return {{"kind", to_string(f.kind)}, {"choice_letters", f.choice_letters}};
}

TaskFamily family_from_json(const json& j) {
  TaskFamily f;
  f.kind = family_kind_from_string(j.at("kind").get<std::string>());
  f.choice_letters = j.value("choice_letters", std::string());
  return f;
}

void sort_by_id(std::vector<ExemplarRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const ExemplarRecord& a, const ExemplarRecord& b) { return a.id < b.id; });
}

}  // namespace

std::vector<DatasetItem> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open dataset " + path);
  std::vector<DatasetItem> items;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      DatasetItem item{id_field(j.at("id")), j.at("question").get<std::string>(),
                       j.at("answer").is_string() ? j.at("answer").get<std::string>()
                                                  : j.at("answer").dump()};
      if (!seen.insert(item.id).second) {
        throw Error(ErrorKind::SchemaMismatch, "duplicate id '" + item.id + "' in " + path);
      }
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw CorruptLineError(line_no, path + ": " + e.what());
    }
  }
  return items;
}

void save_dataset(std::span<const DatasetItem> items, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write dataset " + path);
  for (const auto& item : items) {
    out << json{{"id", item.id}, {"question", item.question}, {"answer", item.answer}}.dump() << '\n';
  }
}

NormalizedAnswer normalize_gold(std::string_view gold, const TaskFamily& family) {
  auto answer = try_extract(gold, family);
  if (!answer) {
    throw Error(ErrorKind::ParameterInvalid, "gold answer '" + std::string(gold) + "' is not a " +
                                                 std::string(to_string(family.kind)) + " answer");
  }
  return std::move(*answer);
}

void save_corpus(const CorpusPair& pair, const std::string& path) {
  std::vector<const ExemplarRecord*> all;
  for (const auto& r : pair.positives) all.push_back(&r);
  for (const auto& r : pair.negatives) all.push_back(&r);
  std::sort(all.begin(), all.end(), [](auto* a, auto* b) { return a->id < b->id; });

  const json header = {{"format", "neganchor-corpus"},
                       {"version", kCorpusFormatVersion},
                       {"provider",
                        {{"provider_id", pair.provider.provider_id},
                         {"dim", pair.provider.dim},
                         {"kind", to_string(pair.provider.kind)}}},
                       {"dataset", pair.dataset},
                       {"task_family", family_to_json(pair.task_family)},
                       {"build_seed", pair.build_seed},
                       {"built_at", pair.built_at}};

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write corpus " + path);
    out << header.dump() << '\n';
    for (const auto* r : all) out << record_to_json(*r).dump() << '\n';
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

CorpusPair load_corpus(const std::string& path, const std::optional<ProviderDescriptor>& expected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus " + path);

  std::string line;
  if (!std::getline(in, line)) throw CorruptLineError(1, "missing header");
  CorpusPair pair;
  try {
    const json header = json::parse(line);
    if (header.value("format", std::string()) != "neganchor-corpus") {
      throw Error(ErrorKind::SchemaMismatch, path + " is not a corpus file");
    }
    const int version = header.at("version").get<int>();
    if (version != kCorpusFormatVersion) {
      throw Error(ErrorKind::SchemaMismatch, "corpus version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kCorpusFormatVersion));
    }
    const json& p = header.at("provider");
    pair.provider = {p.at("provider_id").get<std::string>(), p.at("dim").get<std::size_t>(),
                     provider_kind_from_string(p.at("kind").get<std::string>())};
    pair.dataset = header.at("dataset").get<std::string>();
    pair.task_family = family_from_json(header.at("task_family"));
    pair.build_seed = header.at("build_seed").get<std::uint64_t>();
    pair.built_at = header.value("built_at", std::string());
  } catch (const json::exception& e) {
    throw CorruptLineError(1, e.what());
  }
  if (expected && !(*expected == pair.provider)) {
    throw Error(ErrorKind::SchemaMismatch,
                "corpus built with " + pair.provider.provider_id + " (dim " +
                    std::to_string(pair.provider.dim) + "), expected " + expected->provider_id +
                    " (dim " + std::to_string(expected->dim) + ")");
  }

  std::set<std::string> ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ExemplarRecord record;
    try {
      record = record_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw CorruptLineError(line_no, e.what());
    }
    if (record.embedding.dim() != pair.provider.dim) {
      throw Error(ErrorKind::SchemaMismatch, "line " + std::to_string(line_no) + ": embedding dim " +
                                                 std::to_string(record.embedding.dim()) +
                                                 " but header says " + std::to_string(pair.provider.dim));
    }
    if (!ids.insert(record.id).second) {
      throw Error(ErrorKind::SchemaMismatch, "duplicate record id '" + record.id + "'");
    }
    (record.polarity == Polarity::Positive ? pair.positives : pair.negatives).push_back(std::move(record));
  }
  return pair;
}

CorpusPair build_corpora(std::span<const TrainItem> train_items, LlmGateway& llm,
                         const Embedder& embedder, const TaskFamily& family, std::uint64_t seed,
                         const CorpusBuildOptions& options) {
  if (train_items.empty()) throw Error(ErrorKind::ParameterInvalid, "no train items");

  CorpusPair pair;
  pair.provider = embedder.descriptor();
  pair.dataset = options.dataset;
  pair.task_family = family;
  pair.build_seed = seed;

  std::set<std::string> done;
  if (options.checkpoint_path && std::filesystem::exists(*options.checkpoint_path)) {
    CorpusPair partial = load_corpus(*options.checkpoint_path, pair.provider);
    for (auto* store : {&partial.positives, &partial.negatives}) {
      for (auto& r : *store) {
        done.insert(r.id);
        (r.polarity == Polarity::Positive ? pair.positives : pair.negatives).push_back(std::move(r));
      }
    }
  }

  std::vector<const TrainItem*> pending;
  for (const auto& item : train_items) {
    if (!done.contains(item.id)) pending.push_back(&item);
  }
  std::sort(pending.begin(), pending.end(), [](auto* a, auto* b) { return a->id < b->id; });

  auto checkpoint = [&] {
    if (!options.checkpoint_path) return;
    pair.built_at = utc_timestamp();
    save_corpus(pair, *options.checkpoint_path);
  };

  const std::size_t chunk = std::max<std::size_t>(1, options.checkpoint_every);
  for (std::size_t begin = 0; begin < pending.size(); begin += chunk) {
    const std::size_t end = std::min(pending.size(), begin + chunk);

    std::vector<CompletionRequest> requests;
    std::vector<std::string> questions;
    std::vector<NormalizedAnswer> golds;
    for (std::size_t i = begin; i < end; ++i) {
      requests.push_back({render_query(pending[i]->question), options.model});
      questions.push_back(pending[i]->question);
      golds.push_back(normalize_gold(pending[i]->gold, family));
    }

    const auto outcomes = llm.complete_batch(requests, std::max(1, options.max_in_flight));
    for (const auto& outcome : outcomes) {
      if (!outcome.ok()) {
        checkpoint();
        throw Error(ErrorKind::ProviderUnavailable,
                    std::string("corpus build interrupted: ") + outcome.error->what());
      }
    }
    std::vector<EmbeddingVector> vectors;
    try {
      vectors = embedder.embed_batch(questions);
    } catch (const Error& e) {
      checkpoint();
      if (e.kind() == ErrorKind::EmptyText) throw;
      throw Error(ErrorKind::ProviderUnavailable, std::string("corpus build interrupted: ") + e.what());
    }

    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t local = i - begin;
      ExemplarRecord record;
      record.id = pending[i]->id;
      record.question = pending[i]->question;
      record.rationale = outcomes[local].text;
      record.gold = golds[local].value;
      record.embedding = std::move(vectors[local]);
      record.cluster = pending[i]->cluster;
      record.dataset = options.dataset;
      if (auto predicted = try_extract(record.rationale, family)) {
        record.predicted = predicted->value;
        record.polarity = is_correct(*predicted, golds[local]) ? Polarity::Positive : Polarity::Negative;
      } else {
        record.extraction_failed = true;
        record.polarity = Polarity::Negative;
      }
      (record.polarity == Polarity::Positive ? pair.positives : pair.negatives).push_back(std::move(record));
    }
    if (end < pending.size()) checkpoint();
  }

  sort_by_id(pair.positives);
  sort_by_id(pair.negatives);
  pair.built_at = utc_timestamp();
  if (options.checkpoint_path) std::filesystem::remove(*options.checkpoint_path);
  return pair;
}

}  // namespace neganchor
