#include "erc/dialogue_context.hpp"

#include "erc/errors.hpp"
#include "erc/ops.hpp"

namespace erc {

DialogueTransformerParams DialogueTransformerParams::init(const DialogueTransformerConfig& config, Rng& rng) {
  if (config.max_window == 0) throw ConfigError("dialogue transformer needs max_window >= 1");
  DialogueTransformerParams p;
  p.config = config;
  const auto d = config.d_model;
  if (config.window_positions) p.positions = init_normal({config.max_window, d}, rng);
  for (std::size_t i = 0; i < config.layers; ++i) {
    DialogueTransformerLayer l;
    l.attn_norm = LayerNorm::init(d);
    l.self_attn = AttentionParams::init(d, config.heads, rng);
    l.ff_norm = LayerNorm::init(d);
    l.ff = FeedForward::init(d, config.ff_dim, rng);
    p.layers.push_back(std::move(l));
  }
  p.final_norm = LayerNorm::init(d);
  return p;
}

void DialogueTransformerParams::collect(const std::string& prefix, ParamRefs& out) {
  if (config.window_positions) out.emplace_back(prefix + ".positions", &positions);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto n = prefix + ".layers." + std::to_string(i);
    layers[i].attn_norm.collect(n + ".attn_norm", out);
    layers[i].self_attn.collect(n + ".self_attn", out);
    layers[i].ff_norm.collect(n + ".ff_norm", out);
    layers[i].ff.collect(n + ".ff", out);
  }
  final_norm.collect(prefix + ".final_norm", out);
}

Tensor contextualize(const Tensor& window, const DialogueTransformerParams& params, bool enabled) {
  if (!enabled) return window;
  const auto& cfg = params.config;
  if (window.rank() != 2 || window.cols() != cfg.d_model) {
    throw DimensionError("contextualize: window " + shape_str(window.shape()) + " does not have d_model=" +
                         std::to_string(cfg.d_model) + " columns");
  }
  const std::size_t w = window.rows();
  if (w == 0 || w > cfg.max_window) {
    throw ContractError("contextualize: window of " + std::to_string(w) + " utterances, expected 1.." +
                        std::to_string(cfg.max_window));
  }
  Tensor x = cfg.window_positions ? ops::add(window, ops::slice_rows(params.positions, 0, w)) : window;
  for (const auto& layer : params.layers) {
    const auto h = layer.attn_norm.forward(x);
    x = ops::add(x, multi_head_attention(h, h, layer.self_attn));
    x = ops::add(x, layer.ff.forward(layer.ff_norm.forward(x)));
  }
  return params.final_norm.forward(x);
}

}  // namespace erc
