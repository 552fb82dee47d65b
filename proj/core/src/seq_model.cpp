#include "erc/seq_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "erc/errors.hpp"
#include "erc/ops.hpp"
#include "erc/text.hpp"

namespace erc {

namespace {

Tensor sinusoidal_table(std::size_t len, std::size_t dim) {
  std::vector<double> v(len * dim);
  for (std::size_t pos = 0; pos < len; ++pos)
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) / rate;
      v[pos * dim + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return Tensor::constant({len, dim}, std::move(v));
}

Tensor embed(std::span<const int> ids, const SeqModelParams& p) {
  const auto& cfg = p.config;
  if (ids.size() > cfg.max_len) {
    throw ContractError("sequence of " + std::to_string(ids.size()) + " tokens exceeds max_len " +
                        std::to_string(cfg.max_len));
  }
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(cfg.vocab_size));
    }
  }
  return ops::add(ops::embedding_lookup(p.embedding, ids), ops::slice_rows(p.positions, 0, ids.size()));
}

std::vector<bool> pad_positions(std::span<const int> tokens) {
  std::vector<bool> pad(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) pad[i] = tokens[i] == Vocab::kPad;
  return pad;
}

Tensor run_decoder(const Tensor& memory, std::span<const int> inputs, const SeqModelParams& p,
                   const std::vector<bool>& memory_is_pad) {
  if (memory.rank() != 2 || memory.cols() != p.config.d_model) {
    throw DimensionError("decoder memory " + shape_str(memory.shape()) + " does not have d_model=" +
                         std::to_string(p.config.d_model) + " columns");
  }
  if (!memory_is_pad.empty() && memory_is_pad.size() != memory.rows()) {
    throw DimensionError("memory pad mask length does not match " + shape_str(memory.shape()));
  }
  const std::size_t t = inputs.size();
  Tensor x = embed(inputs, p);
  const Tensor self_mask = causal_mask(t);
  Tensor cross_mask;
  if (std::find(memory_is_pad.begin(), memory_is_pad.end(), true) != memory_is_pad.end()) {
    cross_mask = key_padding_mask(t, memory_is_pad);
  }
  for (const auto& layer : p.decoder) {
    const auto h1 = layer.self_norm.forward(x);
    x = ops::add(x, multi_head_attention(h1, h1, layer.self_attn, &self_mask));
    const auto h2 = layer.cross_norm.forward(x);
    x = ops::add(x, multi_head_attention(h2, memory, layer.cross_attn,
                                         cross_mask.defined() ? &cross_mask : nullptr));
    x = ops::add(x, layer.ff.forward(layer.ff_norm.forward(x)));
  }
  const auto h = p.decoder_norm.forward(x);
  return ops::matmul(h, ops::transpose(p.embedding));
}

}  // namespace

SeqModelParams SeqModelParams::init(const SeqModelConfig& config, Rng& rng) {
  if (config.vocab_size < static_cast<std::size_t>(Vocab::kNumReserved)) throw ConfigError("vocabulary is empty");
  if (config.d_model == 0 || config.max_len < 2) throw ConfigError("invalid sequence model dims");
  SeqModelParams p;
  p.config = config;
  const auto d = config.d_model;
  p.embedding = init_normal({config.vocab_size, d}, rng);
  p.positions = config.positions == PositionEncoding::kLearned ? init_normal({config.max_len, d}, rng)
                                                               : sinusoidal_table(config.max_len, d);
  for (std::size_t i = 0; i < config.encoder_layers; ++i) {
    EncoderLayer l;
    l.attn_norm = LayerNorm::init(d);
    l.self_attn = AttentionParams::init(d, config.heads, rng);
    l.ff_norm = LayerNorm::init(d);
    l.ff = FeedForward::init(d, config.ff_dim, rng);
    p.encoder.push_back(std::move(l));
  }
  p.encoder_norm = LayerNorm::init(d);
  for (std::size_t i = 0; i < config.decoder_layers; ++i) {
    DecoderLayer l;
    l.self_norm = LayerNorm::init(d);
    l.self_attn = AttentionParams::init(d, config.heads, rng);
    l.cross_norm = LayerNorm::init(d);
    l.cross_attn = AttentionParams::init(d, config.heads, rng);
    l.ff_norm = LayerNorm::init(d);
    l.ff = FeedForward::init(d, config.ff_dim, rng);
    p.decoder.push_back(std::move(l));
  }
  p.decoder_norm = LayerNorm::init(d);
  return p;
}

void SeqModelParams::collect(const std::string& prefix, ParamRefs& out) {
  out.emplace_back(prefix + ".embedding", &embedding);
  if (config.positions == PositionEncoding::kLearned) out.emplace_back(prefix + ".positions", &positions);
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    const auto n = prefix + ".encoder." + std::to_string(i);
    encoder[i].attn_norm.collect(n + ".attn_norm", out);
    encoder[i].self_attn.collect(n + ".self_attn", out);
    encoder[i].ff_norm.collect(n + ".ff_norm", out);
    encoder[i].ff.collect(n + ".ff", out);
  }
  encoder_norm.collect(prefix + ".encoder_norm", out);
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    const auto n = prefix + ".decoder." + std::to_string(i);
    decoder[i].self_norm.collect(n + ".self_norm", out);
    decoder[i].self_attn.collect(n + ".self_attn", out);
    decoder[i].cross_norm.collect(n + ".cross_norm", out);
    decoder[i].cross_attn.collect(n + ".cross_attn", out);
    decoder[i].ff_norm.collect(n + ".ff_norm", out);
    decoder[i].ff.collect(n + ".ff", out);
  }
  decoder_norm.collect(prefix + ".decoder_norm", out);
}

EncodedUtterance encode(std::span<const int> tokens, const SeqModelParams& params) {
  if (tokens.empty()) throw ContractError("encode: empty token sequence");
  EncodedUtterance out;
  out.is_pad = pad_positions(tokens);
  if (std::all_of(out.is_pad.begin(), out.is_pad.end(), [](bool b) { return b; })) {
    throw ContractError("encode: sequence consists only of padding");
  }
  const bool any_pad = std::find(out.is_pad.begin(), out.is_pad.end(), true) != out.is_pad.end();
  const std::size_t s = tokens.size();

  Tensor x = embed(tokens, params);
  Tensor mask;
  if (any_pad) mask = key_padding_mask(s, out.is_pad);
  for (const auto& layer : params.encoder) {
    const auto h = layer.attn_norm.forward(x);
    x = ops::add(x, multi_head_attention(h, h, layer.self_attn, any_pad ? &mask : nullptr));
    x = ops::add(x, layer.ff.forward(layer.ff_norm.forward(x)));
  }
  out.hidden_states = params.encoder_norm.forward(x);

  if (any_pad) {
    // Pad rows are pushed to -inf so the max never selects them.
    const std::size_t d = params.config.d_model;
    std::vector<double> pool_mask(s * d, 0.0);
    for (std::size_t r = 0; r < s; ++r)
      if (out.is_pad[r])
        std::fill_n(pool_mask.begin() + static_cast<std::ptrdiff_t>(r * d), d,
                    -std::numeric_limits<double>::infinity());
    out.pooled = ops::max_pool_rows(ops::add(out.hidden_states, Tensor::constant({s, d}, std::move(pool_mask))));
  } else {
    out.pooled = ops::max_pool_rows(out.hidden_states);
  }
  return out;
}

Tensor decode_logits(const Tensor& encoder_states, std::span<const int> target, const SeqModelParams& params,
                     const std::vector<bool>& memory_is_pad) {
  if (target.empty()) throw ContractError("decode_logits: empty target");
  std::vector<int> inputs(target.size());
  inputs[0] = Vocab::kEos;
  std::copy(target.begin(), target.end() - 1, inputs.begin() + 1);
  return run_decoder(encoder_states, inputs, params, memory_is_pad);
}

std::vector<int> greedy_generate(const Tensor& encoder_states, const SeqModelParams& params,
                                 std::size_t max_steps, const std::vector<bool>& memory_is_pad) {
  if (max_steps == 0) throw ContractError("greedy_generate: max_steps must be >= 1");
  max_steps = std::min(max_steps, params.config.max_len);
  std::vector<int> inputs{Vocab::kEos};
  std::vector<int> out;
  while (out.size() < max_steps) {
    const auto logits = run_decoder(encoder_states, inputs, params, memory_is_pad);
    const std::size_t v = logits.cols();
    const auto last = logits.data().subspan((logits.rows() - 1) * v, v);
    const int next = static_cast<int>(std::max_element(last.begin(), last.end()) - last.begin());
    out.push_back(next);
    if (next == Vocab::kEos) break;
    inputs.push_back(next);
  }
  return out;
}

}  // namespace erc
