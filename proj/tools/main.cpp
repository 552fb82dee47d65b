// erc: train, evaluate and inspect conversation emotion classifiers.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "erc/checkpoint.hpp"
#include "erc/config.hpp"
#include "erc/errors.hpp"
#include "erc/synthetic.hpp"
#include "erc/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumeric = 4 };

struct SharedFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_shared(CLI::App* cmd, SharedFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "key = value run configuration");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "run this single seed instead of the configured list");
  cmd->add_option("--out", f.out, "output directory");
}

erc::RunConfig load_config(const SharedFlags& f) {
  auto config = f.config.empty() ? erc::RunConfig{} : erc::RunConfig::load(f.config);
  if (f.seed) config.seeds = {*f.seed};
  if (!f.out.empty()) config.out_dir = f.out;
  return config;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw erc::DataError("cannot write " + path.string());
  out << text;
}

void log_epoch(std::uint64_t seed, const erc::EpochRecord& r) {
  std::fprintf(stderr, "seed %llu epoch %zu  loss %.4f (ce %.4f scl %.4f gen %.4f)  train_acc %.3f  dev %.4f%s\n",
               static_cast<unsigned long long>(seed), r.epoch, r.loss_total, r.loss_ce, r.loss_scl, r.loss_gen,
               r.train_accuracy, r.dev_score, r.improved ? "  *" : "");
}

// Corpus path for `split` (train, dev, test or a file path).
fs::path split_path(const erc::RunConfig& config, const std::string& split) {
  if (split == "train") return config.train_path;
  if (split == "dev") return config.dev_path;
  if (split == "test") return config.test_path;
  return split;
}

int cmd_train(const SharedFlags& f, bool quiet) {
  const auto config = load_config(f);
  const auto summary = erc::train(config, quiet ? erc::EpochCallback{} : erc::EpochCallback(log_epoch));
  for (const auto& r : summary.runs) {
    std::printf("seed %llu: best epoch %zu, dev %.6f, final %.6f, train accuracy %.4f\n",
                static_cast<unsigned long long>(r.seed), r.best_epoch, r.best_dev_score, r.final_score(),
                r.train_accuracy);
  }
  std::printf("mean dev %.6f, mean final %.6f (%s)\n", summary.mean_dev, summary.mean_final,
              (config.out_dir / "summary.json").c_str());
  return kOk;
}

struct EvalFlags {
  std::string checkpoint;
  std::string split = "test";
};

erc::Corpus load_split(const erc::Checkpoint& ck, const SharedFlags& f, const std::string& split,
                       erc::LabelMap& labels) {
  const auto config = f.config.empty() ? ck.config : erc::RunConfig::load(f.config);
  labels = config.label_map();
  const auto path = split_path(config, split);
  if (path.empty()) throw erc::ConfigError("no path configured for split '" + split + "'");
  return erc::load_corpus(path, labels);
}

int cmd_evaluate(const SharedFlags& f, const EvalFlags& e) {
  const auto ck = erc::load_checkpoint(e.checkpoint);
  erc::LabelMap labels;
  const auto corpus = load_split(ck, f, e.split, labels);
  const auto report = erc::evaluate(ck, corpus, labels);
  const auto text = erc::to_json(report).dump(2) + "\n";
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_file(fs::path(f.out) / "metrics.json", text);
    std::printf("%s = %.17g (%s)\n", erc::primary_metric_name(labels).c_str(), erc::primary_score(report),
                (fs::path(f.out) / "metrics.json").c_str());
  }
  return kOk;
}

int cmd_dump(const SharedFlags& f, const EvalFlags& e) {
  const auto ck = erc::load_checkpoint(e.checkpoint);
  erc::LabelMap labels;
  const auto corpus = load_split(ck, f, e.split, labels);
  if (!(labels == ck.labels)) throw erc::CompatibilityError("corpus label set does not match the checkpoint's");
  if (f.out.empty()) {
    erc::dump_embeddings(ck, corpus, std::cout);
  } else {
    const auto path = fs::path(f.out) / "embeddings.tsv";
    fs::create_directories(f.out);
    std::ofstream out(path);
    if (!out) throw erc::DataError("cannot write " + path.string());
    erc::dump_embeddings(ck, corpus, out);
  }
  return kOk;
}

int cmd_ablate(const SharedFlags& f, bool quiet) {
  const auto config = load_config(f);
  const auto rows = erc::ablate(config, quiet ? erc::EpochCallback{} : erc::EpochCallback(log_epoch));
  std::printf("%-14s %10s %10s\n", "row", "mean dev", "mean final");
  for (const auto& r : rows) std::printf("%-14s %10.6f %10.6f\n", r.name.c_str(), r.mean_dev, r.mean_final);
  std::printf("(%s)\n", (config.out_dir / "ablation.json").c_str());
  return kOk;
}

struct StatsFlags {
  std::string manifest;
  bool reference = false;
};

int cmd_data_stats(const SharedFlags& f, const StatsFlags& s) {
  const auto config = load_config(f);
  const auto labels = config.label_map();
  const auto stats = erc::data_stats(config);
  const auto text = erc::to_json(stats, labels).dump(2) + "\n";
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_file(fs::path(f.out) / "data_stats.json", text);
  }

  std::vector<std::string> problems;
  if (!s.manifest.empty()) {
    std::ifstream in(s.manifest);
    if (!in) throw erc::DataError("cannot open manifest " + s.manifest);
    json manifest;
    try {
      in >> manifest;
    } catch (const json::exception& ex) {
      throw erc::DataError("manifest " + s.manifest + ": " + ex.what());
    }
    problems = erc::check_manifest(stats, labels, manifest);
  }
  if (s.reference) {
    auto more = erc::check_reference(stats, labels, config.dataset);
    problems.insert(problems.end(), more.begin(), more.end());
  }
  for (const auto& p : problems) std::fprintf(stderr, "mismatch: %s\n", p.c_str());
  if ((!s.manifest.empty() || s.reference) && problems.empty()) std::fprintf(stderr, "counts match\n");
  return problems.empty() ? kOk : kData;
}

struct SynthFlags {
  std::string kind = "cue";
  std::uint64_t seed = 1;
  std::size_t dialogues = 40;
  std::size_t dev_dialogues = 20;
  std::string out;
};

int cmd_synth(const SynthFlags& s) {
  const fs::path dir = s.out;
  fs::create_directories(dir);
  const auto labels = erc::synthetic_labels();
  erc::Corpus train, dev;
  erc::RunConfig config;
  if (s.kind == "cue") {
    train = erc::make_cue_corpus(s.dialogues, 5, s.seed);
    dev = erc::make_cue_corpus(s.dev_dialogues, 5, s.seed + 1);
    config.epochs = 200;
  } else if (s.kind == "context") {
    train = erc::make_context_corpus(s.dialogues, s.seed);
    dev = erc::make_context_corpus(s.dev_dialogues, s.seed + 1);
    config.window = 2;
    config.epochs = 60;
  } else {
    throw erc::ConfigError("unknown synthetic corpus kind '" + s.kind + "' (cue | context)");
  }
  write_file(dir / "train.jsonl", erc::corpus_to_jsonl(train, labels));
  write_file(dir / "dev.jsonl", erc::corpus_to_jsonl(dev, labels));
  config.train_path = "train.jsonl";
  config.dev_path = "dev.jsonl";
  config.dataset = "custom";
  config.labels = labels.names();
  config.out_dir = "runs";
  write_file(dir / "config.txt", config.to_text());
  std::printf("wrote %s/{train.jsonl,dev.jsonl,config.txt}\n", dir.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion recognition in conversation: training and evaluation"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress per-epoch progress");

  SharedFlags shared;
  EvalFlags eval;
  StatsFlags stats;
  SynthFlags synth;

  auto* train = app.add_subcommand("train", "train every configured seed");
  add_shared(train, shared, true);

  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a split");
  add_shared(evaluate, shared, false);
  evaluate->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
  evaluate->add_option("--split", eval.split, "train | dev | test | path to a JSONL corpus");

  auto* ablate = app.add_subcommand("ablate", "run the eight-row ablation matrix");
  add_shared(ablate, shared, true);

  auto* dump = app.add_subcommand("dump-embeddings", "write contextualized utterance vectors as TSV");
  add_shared(dump, shared, false);
  dump->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
  dump->add_option("--split", eval.split, "train | dev | test | path to a JSONL corpus");

  auto* data_stats = app.add_subcommand("data-stats", "count dialogues, utterances and labels");
  add_shared(data_stats, shared, true);
  data_stats->add_option("--manifest", stats.manifest, "JSON file of expected counts");
  data_stats->add_flag("--reference", stats.reference, "compare against the built-in benchmark counts");

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus and matching config");
  synth_cmd->add_option("--kind", synth.kind, "cue | context");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--dialogues", synth.dialogues, "training dialogues");
  synth_cmd->add_option("--dev-dialogues", synth.dev_dialogues, "dev dialogues");
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*train) return cmd_train(shared, quiet);
    if (*evaluate) return cmd_evaluate(shared, eval);
    if (*ablate) return cmd_ablate(shared, quiet);
    if (*dump) return cmd_dump(shared, eval);
    if (*data_stats) return cmd_data_stats(shared, stats);
    if (*synth_cmd) return cmd_synth(synth);
  } catch (const erc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const erc::CompatibilityError& e) {
    std::fprintf(stderr, "incompatible: %s\n", e.what());
    return kConfig;
  } catch (const erc::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const erc::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
