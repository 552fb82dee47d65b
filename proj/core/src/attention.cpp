#include "erc/attention.hpp"

#include <cmath>
#include <limits>

#include "erc/errors.hpp"
#include "erc/ops.hpp"

namespace erc {

AttentionParams AttentionParams::init(std::size_t dim, std::size_t heads, Rng& rng) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(heads) + ") must divide the hidden dim (" +
                      std::to_string(dim) + ")");
  }
  AttentionParams p;
  p.query = Linear::init(dim, dim, rng);
  p.key = Linear::init(dim, dim, rng);
  p.value = Linear::init(dim, dim, rng);
  p.output = Linear::init(dim, dim, rng);
  p.heads = heads;
  return p;
}

void AttentionParams::collect(const std::string& prefix, ParamRefs& out) {
  query.collect(prefix + ".query", out);
  key.collect(prefix + ".key", out);
  value.collect(prefix + ".value", out);
  output.collect(prefix + ".output", out);
}

Tensor causal_mask(std::size_t n) {
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = -std::numeric_limits<double>::infinity();
  return Tensor::constant({n, n}, std::move(m));
}

Tensor key_padding_mask(std::size_t queries, const std::vector<bool>& key_is_pad) {
  const std::size_t keys = key_is_pad.size();
  std::vector<double> m(queries * keys, 0.0);
  for (std::size_t i = 0; i < queries; ++i)
    for (std::size_t j = 0; j < keys; ++j)
      if (key_is_pad[j]) m[i * keys + j] = -std::numeric_limits<double>::infinity();
  return Tensor::constant({queries, keys}, std::move(m));
}

AttentionResult attend(const Tensor& queries, const Tensor& keys_values, const AttentionParams& params,
                       const Tensor* mask) {
  const std::size_t d = params.dim();
  if (queries.rank() != 2 || keys_values.rank() != 2 || queries.cols() != d || keys_values.cols() != d) {
    throw DimensionError("attention: queries " + shape_str(queries.shape()) + " and keys " +
                         shape_str(keys_values.shape()) + " must both have " + std::to_string(d) +
                         " columns");
  }
  const std::size_t a = queries.rows(), b = keys_values.rows();
  if (a == 0 || b == 0) throw DimensionError("attention: empty query or key set");
  if (mask && mask->shape() != Shape{a, b}) {
    throw DimensionError("attention: mask " + shape_str(mask->shape()) + " does not match [" +
                         std::to_string(a) + "x" + std::to_string(b) + "]");
  }
  const std::size_t dk = d / params.heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dk));

  const Tensor q = params.query.forward(queries);
  const Tensor k = params.key.forward(keys_values);
  const Tensor v = params.value.forward(keys_values);

  AttentionResult res;
  std::vector<Tensor> heads;
  heads.reserve(params.heads);
  for (std::size_t h = 0; h < params.heads; ++h) {
    const auto qh = ops::slice_cols(q, h * dk, (h + 1) * dk);
    const auto kh = ops::slice_cols(k, h * dk, (h + 1) * dk);
    const auto vh = ops::slice_cols(v, h * dk, (h + 1) * dk);
    auto logits = ops::scale(ops::matmul(qh, ops::transpose(kh)), inv_scale);
    if (mask) logits = ops::add(logits, *mask);
    auto weights = ops::softmax_rows(logits);
    heads.push_back(ops::matmul(weights, vh));
    res.weights.push_back(std::move(weights));
  }
  const Tensor merged = params.heads == 1 ? heads.front() : ops::concat_cols(heads);
  res.output = params.output.forward(merged);
  return res;
}

}  // namespace erc
