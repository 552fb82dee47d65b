#pragma once

#include <cstddef>
#include <vector>

#include "erc/layers.hpp"
#include "erc/tensor.hpp"

namespace erc {

/// ceil(warmup_ratio · total_steps).
std::size_t warmup_steps(std::size_t total_steps, double warmup_ratio);

/// Linear warmup from 0 to `peak_lr` over the warmup steps, then linear
/// decay to 0 at `total_steps`.
double lr_at(std::size_t step, std::size_t total_steps, double warmup_ratio, double peak_lr);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  std::size_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

using GradientBuffers = std::vector<std::vector<double>>;

/// Gradient of each parameter in `params` order; zeros for parameters the
/// loss did not reach.
GradientBuffers gather_gradients(const ParamRefs& params, const Gradients& grads);

/// Rescales all buffers so their joint L2 norm is at most `max_norm`
/// (0 disables). Returns the norm before clipping.
double clip_global_norm(GradientBuffers& grads, double max_norm);

/// One AdamW update with bias-corrected moments and weight decay applied to
/// the weights directly. Each parameter is replaced by a fresh leaf tensor.
/// Throws NumericError, leaving params and state untouched, when any
/// gradient entry is NaN or infinite.
void adamw_step(ParamRefs& params, const GradientBuffers& grads, AdamWState& state, double lr,
                const AdamWConfig& config);

}  // namespace erc
