#include "erc/model.hpp"

#include "erc/errors.hpp"
#include "erc/ops.hpp"

namespace erc {

ErcModel ErcModel::init(const RunConfig& config, std::size_t vocab_size, std::size_t num_classes, Rng& rng) {
  SeqModelConfig sc;
  sc.vocab_size = vocab_size;
  sc.d_model = config.d_model;
  sc.encoder_layers = config.encoder_layers;
  sc.decoder_layers = config.decoder_layers;
  sc.heads = config.heads;
  sc.ff_dim = config.ff_dim;
  sc.max_len = config.max_len;
  sc.positions = config.position_encoding == "sinusoidal" ? PositionEncoding::kSinusoidal
                                                          : PositionEncoding::kLearned;
  DialogueTransformerConfig dc;
  dc.d_model = config.d_model;
  dc.heads = config.heads;
  dc.layers = config.dialog_layers;
  dc.ff_dim = config.ff_dim;
  dc.max_window = config.window;
  dc.window_positions = config.dialog_positions;

  ErcModel m;
  m.seq = SeqModelParams::init(sc, rng);
  m.dialog = DialogueTransformerParams::init(dc, rng);
  m.head = ClassifierHead::init(config.d_model, num_classes, rng);
  return m;
}

ParamRefs ErcModel::params() {
  ParamRefs out;
  seq.collect("seq", out);
  dialog.collect("dialog", out);
  head.collect("head", out);
  return out;
}

WindowForward forward_window(const ErcModel& model, std::span<const Utterance> window, const Vocab& vocab,
                             const RunConfig& config) {
  if (window.empty()) throw ContractError("forward_window: empty window");
  WindowForward out;
  std::vector<Tensor> pooled;
  pooled.reserve(window.size());
  for (const auto& u : window) {
    out.tokens.push_back(encode_utterance(u, vocab, config.toggles.use_speaker, config.max_len));
    out.encoded.push_back(encode(out.tokens.back(), model.seq));
    pooled.push_back(out.encoded.back().pooled);
  }
  out.context = contextualize(ops::concat_rows(pooled), model.dialog, config.toggles.use_dialog_trans);
  out.classification = classify(out.context, model.head);
  return out;
}

StepLoss window_loss(const ErcModel& model, const Dialogue& dialogue, std::size_t begin, std::size_t end,
                     const Vocab& vocab, const RunConfig& config, LossDiagnostics* diag) {
  if (begin >= end || end > dialogue.utterances.size()) throw ContractError("window_loss: bad window range");
  const std::span<const Utterance> window(dialogue.utterances.data() + begin, end - begin);
  const auto fw = forward_window(model, window, vocab, config);

  std::vector<int> labels;
  for (const auto& u : window) labels.push_back(u.label);

  const Tensor ce = ce_loss(fw.classification.probabilities, labels, diag);

  const bool scl_wanted = config.toggles.use_scl && config.alpha > 0.0;
  const bool scl_active = scl_wanted && window.size() >= 2;
  if (scl_wanted && !scl_active && diag) ++diag->scl_skipped;
  Tensor scl;
  if (scl_active) {
    scl = scl_loss(build_multiview(fw.context, labels), config.tau, config.scl_variant, config.scl_normalize);
  }

  const bool gen_wanted = config.toggles.use_gen && config.beta > 0.0;
  Tensor gen;
  bool gen_active = false;
  if (gen_wanted) {
    std::vector<GenerationPair> pairs;
    for (std::size_t t = begin; t < end; ++t) {
      if (t + 1 >= dialogue.utterances.size()) break;
      const auto& src = fw.encoded[t - begin];
      pairs.push_back({src.hidden_states, src.is_pad,
                       encode_utterance(dialogue.utterances[t + 1], vocab, config.toggles.use_speaker,
                                        config.max_len)});
    }
    gen = gen_loss(pairs, model.seq, diag);
    gen_active = !pairs.empty();
  }

  StepLoss out;
  out.weights = reassign_weights(config.loss_weights(), scl_active, gen_active);
  out.total = total_loss(ce, scl, gen, out.weights);
  out.ce = ce.item();
  out.scl = scl_active ? scl.item() : 0.0;
  out.gen = gen_active ? gen.item() : 0.0;
  out.predictions = fw.classification.predictions;
  return out;
}

}  // namespace erc
