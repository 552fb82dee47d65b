#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "erc/checkpoint.hpp"
#include "erc/config.hpp"
#include "erc/metrics.hpp"
#include "erc/objectives.hpp"
#include "erc/text.hpp"

namespace erc {

/// Per-epoch training log line (one JSON object in history.jsonl).
struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t steps = 0;
  // Means over the epoch's steps.
  double loss_total = 0.0;
  double loss_ce = 0.0;
  double loss_scl = 0.0;
  double loss_gen = 0.0;
  // Mean weighted contribution w·L of each component.
  double contrib_ce = 0.0;
  double contrib_scl = 0.0;
  double contrib_gen = 0.0;
  /// Weights the toggles ask for; individual steps may reassign more to CE
  /// (see `scl_skipped`, `gen_empty`).
  ComponentWeights weights;
  double max_weight_sum_error = 0.0;  // max over steps of |w_ce + w_scl + w_gen - 1|
  double train_accuracy = 0.0;         // from the training forward passes
  double dev_score = 0.0;
  bool improved = false;
  double lr_last = 0.0;
  LossDiagnostics diagnostics;
};

nlohmann::json to_json(const EpochRecord& r);

struct RunResult {
  std::uint64_t seed = 0;
  std::filesystem::path run_dir;
  std::filesystem::path checkpoint;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_dev_score = 0.0;
  EvalReport dev_report;                 // best checkpoint on dev
  std::optional<EvalReport> test_report; // best checkpoint on test, if given
  double train_accuracy = 0.0;           // best checkpoint on train

  /// Test primary score when a test split exists, else the best dev score.
  double final_score() const;
};

struct TrainSummary {
  std::vector<RunResult> runs;
  double mean_dev = 0.0;
  double mean_final = 0.0;
};

/// Called after every epoch; useful for progress output.
using EpochCallback = std::function<void(std::uint64_t seed, const EpochRecord&)>;

/// Trains one seed. Writes `run_dir`/{checkpoint.best, history.jsonl,
/// metrics.json, dev_metrics.json}.
RunResult train_run(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& run_dir,
                    const EpochCallback& on_epoch = {});

/// Trains every seed under `out_dir`/seed_<n> and writes `out_dir`/summary.json.
TrainSummary train(const RunConfig& config, const EpochCallback& on_epoch = {});

struct Predictions {
  std::vector<int> gold;
  std::vector<int> predicted;
};

/// Per-utterance predictions over contextualized windows, in corpus order.
Predictions predict(const Checkpoint& ckpt, const Corpus& corpus);

/// Throws CompatibilityError when the corpus label set differs from the
/// checkpoint's.
EvalReport evaluate(const Checkpoint& ckpt, const Corpus& corpus, const LabelMap& corpus_labels);

/// One tab-separated row per utterance: dialogue_id, index, gold label,
/// predicted label and the d context coordinates.
void dump_embeddings(const Checkpoint& ckpt, const Corpus& corpus, std::ostream& out);

struct AblationRow {
  std::string name;
  AblationToggles toggles;
  double alpha = 0.0;
  double beta = 0.0;
  ComponentWeights weights;
  std::vector<std::uint64_t> seeds;
  std::vector<double> dev_scores;
  std::vector<double> final_scores;
  double mean_dev = 0.0;
  double mean_final = 0.0;
  double max_weight_sum_error = 0.0;
  double disabled_contribution = 0.0;  // Σ |w·L| over components switched off
};

/// The eight configurations of the ablation table, derived from `base`.
std::vector<std::pair<std::string, RunConfig>> ablation_configs(const RunConfig& base);

/// Runs all rows over all seeds under `out_dir`/ablation/<row> and writes
/// `out_dir`/ablation.json.
std::vector<AblationRow> ablate(const RunConfig& base, const EpochCallback& on_epoch = {});

nlohmann::json to_json(const std::vector<AblationRow>& rows, const std::string& metric);

struct SplitStats {
  std::string split;
  std::filesystem::path path;
  CorpusStats stats;
};

/// Dialogue and utterance counts of the reference benchmark splits
/// (DailyDialog, MELD, EmoryNLP, IEMOCAP).
struct ReferenceCounts {
  std::size_t dialogues;
  std::size_t utterances;
};
std::optional<ReferenceCounts> reference_counts(const std::string& dataset, const std::string& split);
std::optional<std::size_t> reference_num_classes(const std::string& dataset);

std::vector<SplitStats> data_stats(const RunConfig& config);
nlohmann::json to_json(const std::vector<SplitStats>& stats, const LabelMap& labels);

/// Compares stats against a manifest of the form
/// {"<split>": {"dialogues": n, "utterances": n, "class_counts": {...}}}.
/// Returns one message per mismatch.
std::vector<std::string> check_manifest(const std::vector<SplitStats>& stats, const LabelMap& labels,
                                        const nlohmann::json& manifest);
/// Same against the built-in reference counts of `dataset`.
std::vector<std::string> check_reference(const std::vector<SplitStats>& stats, const LabelMap& labels,
                                         const std::string& dataset);

}  // namespace erc
