#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "erc/tensor.hpp"

namespace erc {

using Rng = std::mt19937_64;

/// Named handles to trainable tensors. Pointers refer into the owning
/// parameter struct and stay valid while it lives.
using ParamRefs = std::vector<std::pair<std::string, Tensor*>>;

inline constexpr double kInitStd = 0.02;

/// normal(0, kInitStd) weights.
Tensor init_normal(Shape shape, Rng& rng, double std = kInitStd);

struct Linear {
  Tensor weight;  // [in×out]
  Tensor bias;    // [out]

  static Linear init(std::size_t in, std::size_t out, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParamRefs& out);
};

struct LayerNorm {
  Tensor gain;
  Tensor shift;

  static LayerNorm init(std::size_t dim);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParamRefs& out);
};

struct FeedForward {
  Linear hidden;
  Linear output;

  static FeedForward init(std::size_t dim, std::size_t ff_dim, Rng& rng);
  /// output(gelu(hidden(x)))
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParamRefs& out);
};

}  // namespace erc
