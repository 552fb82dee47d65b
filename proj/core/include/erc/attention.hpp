#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "erc/layers.hpp"
#include "erc/tensor.hpp"

namespace erc {

/// Multi-head attention weights. Head i uses columns [i·d_k, (i+1)·d_k) of
/// the query, key and value projections, with d_k = d / heads.
struct AttentionParams {
  Linear query;
  Linear key;
  Linear value;
  Linear output;  // W^O, [d×d]
  std::size_t heads = 1;

  static AttentionParams init(std::size_t dim, std::size_t heads, Rng& rng);
  std::size_t dim() const { return output.weight.shape()[1]; }
  void collect(const std::string& prefix, ParamRefs& out);
};

struct AttentionResult {
  Tensor output;                 // [a×d]
  std::vector<Tensor> weights;   // one [a×b] softmax matrix per head
};

/// Additive attention mask of shape [a×b]: 0 where attending is allowed,
/// -inf where it is not.
Tensor causal_mask(std::size_t n);
Tensor key_padding_mask(std::size_t queries, const std::vector<bool>& key_is_pad);

/// Scaled dot-product attention per head (scale 1/sqrt(d_k)), heads
/// concatenated and projected by W^O. `mask`, when given, is added to the
/// attention logits before the softmax.
AttentionResult attend(const Tensor& queries, const Tensor& keys_values, const AttentionParams& params,
                       const Tensor* mask = nullptr);

inline Tensor multi_head_attention(const Tensor& queries, const Tensor& keys_values,
                                   const AttentionParams& params, const Tensor* mask = nullptr) {
  return attend(queries, keys_values, params, mask).output;
}

}  // namespace erc
