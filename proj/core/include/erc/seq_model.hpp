#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "erc/attention.hpp"
#include "erc/layers.hpp"
#include "erc/tensor.hpp"

namespace erc {

enum class PositionEncoding { kLearned, kSinusoidal };

struct SeqModelConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t heads = 4;
  std::size_t ff_dim = 128;
  std::size_t max_len = 64;
  PositionEncoding positions = PositionEncoding::kLearned;
};

struct EncoderLayer {
  LayerNorm attn_norm;
  AttentionParams self_attn;
  LayerNorm ff_norm;
  FeedForward ff;
};

struct DecoderLayer {
  LayerNorm self_norm;
  AttentionParams self_attn;
  LayerNorm cross_norm;
  AttentionParams cross_attn;
  LayerNorm ff_norm;
  FeedForward ff;
};

/// Encoder-decoder transformer with pre-layer-norm blocks. The token
/// embedding is shared by encoder input, decoder input and the output
/// projection (logits = h · Eᵀ).
struct SeqModelParams {
  SeqModelConfig config;
  Tensor embedding;  // [V×d]
  Tensor positions;  // [max_len×d]; a constant when sinusoidal
  std::vector<EncoderLayer> encoder;
  LayerNorm encoder_norm;
  std::vector<DecoderLayer> decoder;
  LayerNorm decoder_norm;

  static SeqModelParams init(const SeqModelConfig& config, Rng& rng);
  void collect(const std::string& prefix, ParamRefs& out);
};

struct EncodedUtterance {
  Tensor hidden_states;       // [s×d]
  Tensor pooled;              // [d]
  std::vector<bool> is_pad;   // per position
};

/// Encoder-final states and their max-pool over non-pad rows.
EncodedUtterance encode(std::span<const int> tokens, const SeqModelParams& params);

/// Teacher-forced next-token logits [t×V]. The decoder reads `target`
/// shifted right behind a </s> start token, so row j depends only on the
/// encoder states and target[0..j).
Tensor decode_logits(const Tensor& encoder_states, std::span<const int> target,
                     const SeqModelParams& params, const std::vector<bool>& memory_is_pad = {});

/// Argmax decoding from the </s> start token. Stops after emitting </s> or
/// `max_steps` tokens; the returned sequence excludes the start token.
std::vector<int> greedy_generate(const Tensor& encoder_states, const SeqModelParams& params,
                                 std::size_t max_steps, const std::vector<bool>& memory_is_pad = {});

}  // namespace erc
