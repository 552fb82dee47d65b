#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "erc/attention.hpp"
#include "erc/layers.hpp"
#include "erc/tensor.hpp"

namespace erc {

struct DialogueTransformerConfig {
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t layers = 1;
  std::size_t ff_dim = 128;
  std::size_t max_window = 8;
  bool window_positions = true;
};

struct DialogueTransformerLayer {
  LayerNorm attn_norm;
  AttentionParams self_attn;
  LayerNorm ff_norm;
  FeedForward ff;
};

/// Transformer layers over the pooled utterance vectors of one window.
struct DialogueTransformerParams {
  DialogueTransformerConfig config;
  Tensor positions;  // [max_window×d], only when window_positions is on
  std::vector<DialogueTransformerLayer> layers;
  LayerNorm final_norm;

  static DialogueTransformerParams init(const DialogueTransformerConfig& config, Rng& rng);
  void collect(const std::string& prefix, ParamRefs& out);
};

/// Context-modeled utterance states for a window [w×d]. Each layer applies
/// bidirectional self-attention and a feed-forward block, both pre-norm with
/// residual connections. With `enabled` off the input passes through
/// unchanged.
Tensor contextualize(const Tensor& window, const DialogueTransformerParams& params, bool enabled = true);

}  // namespace erc
