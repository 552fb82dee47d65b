#include <benchmark/benchmark.h>

#include "erc/model.hpp"
#include "erc/optimizer.hpp"
#include "erc/seq_model.hpp"
#include "erc/synthetic.hpp"

namespace {

erc::RunConfig bench_config() {
  erc::RunConfig c;
  c.dataset = "custom";
  c.labels = erc::synthetic_labels().names();
  return c;
}

void BM_EncodeUtterance(benchmark::State& state) {
  const auto corpus = erc::make_cue_corpus(4, 5, 1);
  const auto vocab = erc::build_vocab(corpus);
  erc::SeqModelConfig cfg;
  cfg.vocab_size = vocab.size();
  erc::Rng rng(2);
  const auto model = erc::SeqModelParams::init(cfg, rng);
  const auto tokens = erc::encode_utterance(corpus[0].utterances[0], vocab, true);
  for (auto _ : state) benchmark::DoNotOptimize(erc::encode(tokens, model));
  state.counters["tokens"] = static_cast<double>(tokens.size());
}
BENCHMARK(BM_EncodeUtterance);

// One optimizer step on a five-utterance window with all objectives active.
void BM_TrainingStep(benchmark::State& state) {
  const auto corpus = erc::make_cue_corpus(4, 5, 1);
  const auto vocab = erc::build_vocab(corpus);
  auto cfg = bench_config();
  erc::Rng rng(3);
  auto model = erc::ErcModel::init(cfg, vocab.size(), erc::synthetic_labels().size(), rng);
  auto params = model.params();
  erc::AdamWState opt;
  const erc::AdamWConfig adam{cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.weight_decay};
  const auto& dialogue = corpus[0];
  for (auto _ : state) {
    const auto step = erc::window_loss(model, dialogue, 0, dialogue.utterances.size(), vocab, cfg);
    auto grads = erc::gather_gradients(params, erc::backward(step.total));
    erc::clip_global_norm(grads, cfg.clip_norm);
    erc::adamw_step(params, grads, opt, cfg.lr, adam);
  }
}
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMillisecond);

}  // namespace
