#include "erc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "erc/errors.hpp"
#include "erc/optimizer.hpp"

namespace erc {

using nlohmann::json;

namespace {

struct Corpora {
  LabelMap labels;
  Corpus train;
  Corpus dev;
  std::optional<Corpus> test;
};

Corpora load_corpora(const RunConfig& config) {
  Corpora c;
  c.labels = config.label_map();
  if (config.train_path.empty() || config.dev_path.empty()) {
    throw ConfigError("train_path and dev_path are required");
  }
  c.train = load_corpus(config.train_path, c.labels);
  c.dev = load_corpus(config.dev_path, c.labels);
  if (!config.test_path.empty()) c.test = load_corpus(config.test_path, c.labels);
  if (c.train.empty()) throw DataError("training corpus " + config.train_path.string() + " is empty");
  if (c.dev.empty()) throw DataError("dev corpus " + config.dev_path.string() + " is empty");
  return c;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <class F>
void for_each_window(const Corpus& corpus, std::size_t window, F&& f) {
  for (const auto& d : corpus)
    for (std::size_t begin = 0; begin < d.utterances.size(); begin += window)
      f(d, begin, std::min(begin + window, d.utterances.size()));
}

Predictions predict_with(const ErcModel& model, const Vocab& vocab, const RunConfig& config, const Corpus& corpus) {
  Predictions p;
  for_each_window(corpus, config.window, [&](const Dialogue& d, std::size_t begin, std::size_t end) {
    const std::span<const Utterance> win(d.utterances.data() + begin, end - begin);
    const auto fw = forward_window(model, win, vocab, config);
    for (std::size_t i = 0; i < win.size(); ++i) {
      p.gold.push_back(win[i].label);
      p.predicted.push_back(fw.classification.predictions[i]);
    }
  });
  return p;
}

double accuracy(const Predictions& p) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.gold.size(); ++i) ok += p.gold[i] == p.predicted[i];
  return p.gold.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(p.gold.size());
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

json diagnostics_json(const LossDiagnostics& d) {
  return {{"ce_clamped", d.ce_clamped}, {"gen_empty", d.gen_empty}, {"scl_skipped", d.scl_skipped}};
}

json weights_json(const ComponentWeights& w) { return {{"ce", w.ce}, {"scl", w.scl}, {"gen", w.gen}}; }

}  // namespace

json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"steps", r.steps},
          {"loss", {{"total", r.loss_total}, {"ce", r.loss_ce}, {"scl", r.loss_scl}, {"gen", r.loss_gen}}},
          {"contribution", {{"ce", r.contrib_ce}, {"scl", r.contrib_scl}, {"gen", r.contrib_gen}}},
          {"weights", weights_json(r.weights)},
          {"weight_sum", r.weights.ce + r.weights.scl + r.weights.gen},
          {"max_weight_sum_error", r.max_weight_sum_error},
          {"train_accuracy", r.train_accuracy},
          {"dev_score", r.dev_score},
          {"improved", r.improved},
          {"lr_last", r.lr_last},
          {"diagnostics", diagnostics_json(r.diagnostics)}};
}

double RunResult::final_score() const { return test_report ? primary_score(*test_report) : best_dev_score; }

RunResult train_run(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& run_dir,
                    const EpochCallback& on_epoch) {
  config.validate();
  const auto data = load_corpora(config);
  const Vocab vocab = build_vocab(data.train, config.min_freq);

  Rng init_rng(seed);
  Rng order_rng(seed ^ 0x9e3779b97f4a7c15ull);
  Checkpoint ck;
  ck.config = config;
  ck.vocab = vocab;
  ck.labels = data.labels;
  ck.model = ErcModel::init(config, vocab.size(), data.labels.size(), init_rng);

  std::size_t windows_per_epoch = 0;
  for_each_window(data.train, config.window, [&](const Dialogue&, std::size_t, std::size_t) { ++windows_per_epoch; });
  const std::size_t total_steps = windows_per_epoch * config.epochs;
  const AdamWConfig adam{config.adam_beta1, config.adam_beta2, config.adam_eps, config.weight_decay};
  const auto base_weights =
      reassign_weights(config.loss_weights(), config.toggles.use_scl && config.alpha > 0.0,
                       config.toggles.use_gen && config.beta > 0.0);

  std::filesystem::create_directories(run_dir);
  std::ofstream history(run_dir / "history.jsonl", std::ios::trunc);
  if (!history) throw DataError("cannot write " + (run_dir / "history.jsonl").string());

  RunResult res;
  res.seed = seed;
  res.run_dir = run_dir;
  res.checkpoint = run_dir / "checkpoint.best";

  AdamWState state;
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), order_rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.weights = base_weights;
    std::size_t correct = 0, seen = 0;
    for (auto di : order) {
      const auto& d = data.train[di];
      for (std::size_t begin = 0; begin < d.utterances.size(); begin += config.window) {
        const std::size_t end = std::min(begin + config.window, d.utterances.size());
        auto loss = window_loss(ck.model, d, begin, end, vocab, config, &rec.diagnostics);
        const double total = loss.total.item();
        if (!std::isfinite(total)) throw NumericError("non-finite loss at step " + std::to_string(step + 1));

        auto params = ck.model.params();
        auto grads = gather_gradients(params, backward(loss.total));
        clip_global_norm(grads, config.clip_norm);
        ++step;
        rec.lr_last = lr_at(step, total_steps, config.warmup_ratio, config.lr);
        adamw_step(params, grads, state, rec.lr_last, adam);

        ++rec.steps;
        rec.loss_total += total;
        rec.loss_ce += loss.ce;
        rec.loss_scl += loss.scl;
        rec.loss_gen += loss.gen;
        rec.contrib_ce += loss.weights.ce * loss.ce;
        rec.contrib_scl += loss.weights.scl * loss.scl;
        rec.contrib_gen += loss.weights.gen * loss.gen;
        rec.max_weight_sum_error = std::max(
            rec.max_weight_sum_error, std::abs(loss.weights.ce + loss.weights.scl + loss.weights.gen - 1.0));
        for (std::size_t i = 0; i < loss.predictions.size(); ++i) {
          correct += loss.predictions[i] == d.utterances[begin + i].label;
          ++seen;
        }
      }
    }
    const double n = static_cast<double>(rec.steps);
    for (double* v : {&rec.loss_total, &rec.loss_ce, &rec.loss_scl, &rec.loss_gen, &rec.contrib_ce,
                      &rec.contrib_scl, &rec.contrib_gen})
      *v /= n;
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);

    const auto dev_pred = predict_with(ck.model, vocab, config, data.dev);
    rec.dev_score = primary_score(evaluate_predictions(dev_pred.gold, dev_pred.predicted, data.labels));
    if (!have_best || rec.dev_score > res.best_dev_score) {
      have_best = true;
      rec.improved = true;
      res.best_dev_score = rec.dev_score;
      res.best_epoch = epoch;
      ck.epoch = static_cast<std::int64_t>(epoch);
      ck.dev_score = rec.dev_score;
      save_checkpoint(res.checkpoint, ck);
    }
    history << to_json(rec).dump() << '\n';
    history.flush();
    res.history.push_back(rec);
    if (on_epoch) on_epoch(seed, rec);
  }

  const auto best = load_checkpoint(res.checkpoint);
  res.dev_report = evaluate(best, data.dev, data.labels);
  res.train_accuracy = accuracy(predict(best, data.train));
  write_json(run_dir / "dev_metrics.json", to_json(res.dev_report));
  if (data.test) {
    res.test_report = evaluate(best, *data.test, data.labels);
    write_json(run_dir / "metrics.json", to_json(*res.test_report));
  } else {
    write_json(run_dir / "metrics.json", to_json(res.dev_report));
  }
  return res;
}

TrainSummary train(const RunConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  TrainSummary s;
  std::vector<double> dev, fin;
  json runs = json::array();
  for (auto seed : config.seeds) {
    s.runs.push_back(train_run(config, seed, config.out_dir / ("seed_" + std::to_string(seed)), on_epoch));
    const auto& r = s.runs.back();
    dev.push_back(r.best_dev_score);
    fin.push_back(r.final_score());
    runs.push_back({{"seed", seed},
                    {"best_epoch", r.best_epoch},
                    {"best_dev_score", r.best_dev_score},
                    {"final_score", r.final_score()},
                    {"train_accuracy", r.train_accuracy},
                    {"checkpoint", r.checkpoint.string()}});
  }
  s.mean_dev = mean(dev);
  s.mean_final = mean(fin);
  write_json(config.out_dir / "summary.json", {{"metric", primary_metric_name(config.label_map())},
                                               {"runs", runs},
                                               {"mean_dev_score", s.mean_dev},
                                               {"mean_final_score", s.mean_final}});
  return s;
}

Predictions predict(const Checkpoint& ckpt, const Corpus& corpus) {
  return predict_with(ckpt.model, ckpt.vocab, ckpt.config, corpus);
}

EvalReport evaluate(const Checkpoint& ckpt, const Corpus& corpus, const LabelMap& corpus_labels) {
  if (!(corpus_labels == ckpt.labels)) {
    throw CompatibilityError("corpus label set does not match the checkpoint's label set");
  }
  if (ckpt.model.seq.config.vocab_size != ckpt.vocab.size()) {
    throw CompatibilityError("checkpoint embedding table does not match its vocabulary");
  }
  if (corpus.empty()) throw DataError("cannot evaluate on an empty corpus");
  const auto p = predict(ckpt, corpus);
  return evaluate_predictions(p.gold, p.predicted, ckpt.labels);
}

void dump_embeddings(const Checkpoint& ckpt, const Corpus& corpus, std::ostream& out) {
  char buf[32];
  for_each_window(corpus, ckpt.config.window, [&](const Dialogue& d, std::size_t begin, std::size_t end) {
    const std::span<const Utterance> win(d.utterances.data() + begin, end - begin);
    const auto fw = forward_window(ckpt.model, win, ckpt.vocab, ckpt.config);
    const std::size_t dim = fw.context.cols();
    for (std::size_t i = 0; i < win.size(); ++i) {
      out << d.dialogue_id << '\t' << win[i].index_in_dialogue << '\t' << ckpt.labels.name(win[i].label) << '\t'
          << ckpt.labels.name(fw.classification.predictions[i]);
      for (std::size_t c = 0; c < dim; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", fw.context.at(i, c));
        out << '\t' << buf;
      }
      out << '\n';
    }
  });
}

std::vector<std::pair<std::string, RunConfig>> ablation_configs(const RunConfig& base) {
  struct Row {
    const char* name;
    bool gen, scl, speaker, dialog;
  };
  static constexpr Row rows[] = {
      {"full", true, true, true, true},          {"-Gen", false, true, true, true},
      {"-SCL", true, false, true, true},         {"-Speaker", true, true, false, true},
      {"-Gen-SCL", false, false, true, true},    {"-SCL-Speaker", true, false, false, true},
      {"-Gen-Speaker", false, true, false, true}, {"-Dialog-Trans", true, true, true, false},
  };
  std::vector<std::pair<std::string, RunConfig>> out;
  for (const auto& r : rows) {
    RunConfig c = base;
    c.toggles = {r.gen, r.scl, r.speaker, r.dialog};
    if (!r.gen) c.beta = 0.0;
    if (!r.scl) c.alpha = 0.0;
    out.emplace_back(r.name, std::move(c));
  }
  return out;
}

std::vector<AblationRow> ablate(const RunConfig& base, const EpochCallback& on_epoch) {
  base.validate();
  std::vector<AblationRow> rows;
  for (auto& [name, cfg] : ablation_configs(base)) {
    AblationRow row;
    row.name = name;
    row.toggles = cfg.toggles;
    row.alpha = cfg.alpha;
    row.beta = cfg.beta;
    row.weights = reassign_weights(cfg.loss_weights(), cfg.toggles.use_scl && cfg.alpha > 0.0,
                                   cfg.toggles.use_gen && cfg.beta > 0.0);
    row.seeds = cfg.seeds;
    for (auto seed : cfg.seeds) {
      const auto dir = base.out_dir / "ablation" / name / ("seed_" + std::to_string(seed));
      const auto r = train_run(cfg, seed, dir, on_epoch);
      row.dev_scores.push_back(r.best_dev_score);
      row.final_scores.push_back(r.final_score());
      for (const auto& e : r.history) {
        row.max_weight_sum_error = std::max(row.max_weight_sum_error, e.max_weight_sum_error);
        if (!cfg.toggles.use_scl) row.disabled_contribution += std::abs(e.contrib_scl);
        if (!cfg.toggles.use_gen) row.disabled_contribution += std::abs(e.contrib_gen);
      }
    }
    row.mean_dev = mean(row.dev_scores);
    row.mean_final = mean(row.final_scores);
    rows.push_back(std::move(row));
  }
  write_json(base.out_dir / "ablation.json", to_json(rows, primary_metric_name(base.label_map())));
  return rows;
}

json to_json(const std::vector<AblationRow>& rows, const std::string& metric) {
  json out;
  out["metric"] = metric;
  out["rows"] = json::array();
  for (const auto& r : rows) {
    out["rows"].push_back({{"name", r.name},
                           {"use_gen", r.toggles.use_gen},
                           {"use_scl", r.toggles.use_scl},
                           {"use_speaker", r.toggles.use_speaker},
                           {"use_dialog_trans", r.toggles.use_dialog_trans},
                           {"alpha", r.alpha},
                           {"beta", r.beta},
                           {"weights", weights_json(r.weights)},
                           {"weight_sum", r.weights.ce + r.weights.scl + r.weights.gen},
                           {"seeds", r.seeds},
                           {"dev_scores", r.dev_scores},
                           {"final_scores", r.final_scores},
                           {"mean_dev_score", r.mean_dev},
                           {"mean_final_score", r.mean_final},
                           {"max_weight_sum_error", r.max_weight_sum_error},
                           {"disabled_contribution", r.disabled_contribution}});
  }
  return out;
}

std::optional<ReferenceCounts> reference_counts(const std::string& dataset, const std::string& split) {
  struct Entry {
    const char* dataset;
    const char* split;
    ReferenceCounts counts;
  };
  static constexpr Entry table[] = {
      {"dailydialog", "train", {11118, 87170}}, {"dailydialog", "dev", {1000, 8069}},
      {"dailydialog", "test", {1000, 7740}},    {"meld", "train", {1038, 9989}},
      {"meld", "dev", {114, 1109}},             {"meld", "test", {280, 2610}},
      {"emorynlp", "train", {713, 9934}},       {"emorynlp", "dev", {99, 1344}},
      {"emorynlp", "test", {85, 1328}},         {"iemocap", "train", {120, 5810}},
      {"iemocap", "dev", {120, 5810}},          {"iemocap", "test", {31, 1623}},
  };
  for (const auto& e : table)
    if (dataset == e.dataset && split == e.split) return e.counts;
  return std::nullopt;
}

std::optional<std::size_t> reference_num_classes(const std::string& dataset) {
  if (dataset == "dailydialog" || dataset == "meld" || dataset == "emorynlp") return 7;
  if (dataset == "iemocap") return 6;
  return std::nullopt;
}

std::vector<SplitStats> data_stats(const RunConfig& config) {
  const auto labels = config.label_map();
  std::vector<SplitStats> out;
  for (const auto& [split, path] : {std::pair<std::string, std::filesystem::path>{"train", config.train_path},
                                    {"dev", config.dev_path},
                                    {"test", config.test_path}}) {
    if (path.empty()) continue;
    out.push_back({split, path, corpus_stats(load_corpus(path, labels), labels)});
  }
  if (out.empty()) throw ConfigError("data-stats needs at least one of train_path, dev_path, test_path");
  return out;
}

json to_json(const std::vector<SplitStats>& stats, const LabelMap& labels) {
  json out = json::object();
  for (const auto& s : stats) {
    json counts = json::object();
    for (std::size_t k = 0; k < labels.size(); ++k) counts[labels.names()[k]] = s.stats.class_counts[k];
    out[s.split] = {{"path", s.path.string()},
                    {"dialogues", s.stats.num_dialogues},
                    {"utterances", s.stats.num_utterances},
                    {"classes", s.stats.num_classes},
                    {"class_counts", counts}};
  }
  return out;
}

std::vector<std::string> check_manifest(const std::vector<SplitStats>& stats, const LabelMap& labels,
                                        const json& manifest) {
  std::vector<std::string> problems;
  auto expect = [&](const std::string& what, std::size_t got, const json& want) {
    if (!want.is_number_unsigned() && !want.is_number_integer()) {
      problems.push_back(what + ": manifest value is not an integer");
    } else if (want.get<std::size_t>() != got) {
      problems.push_back(what + ": expected " + std::to_string(want.get<std::size_t>()) + ", found " +
                         std::to_string(got));
    }
  };
  for (const auto& s : stats) {
    if (!manifest.contains(s.split)) continue;
    const auto& m = manifest.at(s.split);
    if (m.contains("dialogues")) expect(s.split + " dialogues", s.stats.num_dialogues, m.at("dialogues"));
    if (m.contains("utterances")) expect(s.split + " utterances", s.stats.num_utterances, m.at("utterances"));
    if (m.contains("classes")) expect(s.split + " classes", s.stats.num_classes, m.at("classes"));
    if (m.contains("class_counts")) {
      for (const auto& [name, want] : m.at("class_counts").items()) {
        const auto id = labels.find(name);
        if (!id) {
          problems.push_back(s.split + " class_counts: unknown label '" + name + "'");
          continue;
        }
        expect(s.split + " count of '" + name + "'", s.stats.class_counts[static_cast<std::size_t>(*id)], want);
      }
    }
  }
  for (const auto& [split, _] : manifest.items()) {
    if (std::none_of(stats.begin(), stats.end(), [&](const SplitStats& s) { return s.split == split; })) {
      problems.push_back("manifest lists split '" + split + "' but no file was given for it");
    }
  }
  return problems;
}

std::vector<std::string> check_reference(const std::vector<SplitStats>& stats, const LabelMap& labels,
                                         const std::string& dataset) {
  const auto classes = reference_num_classes(dataset);
  if (!classes) throw ConfigError("no reference statistics for dataset '" + dataset + "'");
  json manifest = json::object();
  for (const auto& s : stats) {
    if (auto ref = reference_counts(dataset, s.split)) {
      manifest[s.split] = {{"dialogues", ref->dialogues}, {"utterances", ref->utterances}, {"classes", *classes}};
    }
  }
  return check_manifest(stats, labels, manifest);
}

}  // namespace erc
