#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "erc/config.hpp"
#include "erc/dialogue_context.hpp"
#include "erc/objectives.hpp"
#include "erc/seq_model.hpp"
#include "erc/text.hpp"

namespace erc {

/// Utterance encoder-decoder, dialogue-level transformer and classifier head.
struct ErcModel {
  SeqModelParams seq;
  DialogueTransformerParams dialog;
  ClassifierHead head;

  static ErcModel init(const RunConfig& config, std::size_t vocab_size, std::size_t num_classes, Rng& rng);
  /// Named parameter handles in a fixed order.
  ParamRefs params();
};

struct WindowForward {
  std::vector<std::vector<int>> tokens;
  std::vector<EncodedUtterance> encoded;
  Tensor context;  // [w×d] after the dialogue transformer
  Classification classification;
};

/// Encodes every utterance of the window, pools, contextualizes and classifies.
WindowForward forward_window(const ErcModel& model, std::span<const Utterance> window, const Vocab& vocab,
                             const RunConfig& config);

struct StepLoss {
  Tensor total;
  double ce = 0.0;
  double scl = 0.0;
  double gen = 0.0;
  ComponentWeights weights;
  std::vector<int> predictions;
};

/// Training loss of the window [begin, end) of `dialogue`. Generation pairs
/// cover every utterance in the window that has a successor in the dialogue,
/// so across all windows a dialogue of m utterances yields m-1 pairs.
StepLoss window_loss(const ErcModel& model, const Dialogue& dialogue, std::size_t begin, std::size_t end,
                     const Vocab& vocab, const RunConfig& config, LossDiagnostics* diag = nullptr);

}  // namespace erc
