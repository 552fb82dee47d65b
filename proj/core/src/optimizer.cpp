#include "erc/optimizer.hpp"

#include <cmath>

#include "erc/errors.hpp"

namespace erc {

std::size_t warmup_steps(std::size_t total_steps, double warmup_ratio) {
  // The small slack keeps products such as 0.1 * 100 from rounding up a step.
  return static_cast<std::size_t>(std::ceil(warmup_ratio * static_cast<double>(total_steps) - 1e-9));
}

double lr_at(std::size_t step, std::size_t total_steps, double warmup_ratio, double peak_lr) {
  if (total_steps == 0) throw ContractError("lr_at: total_steps must be >= 1");
  if (step > total_steps) throw ContractError("lr_at: step beyond total_steps");
  const std::size_t warmup = warmup_steps(total_steps, warmup_ratio);
  if (step < warmup) return peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
  if (warmup == total_steps) return peak_lr;
  return peak_lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup);
}

GradientBuffers gather_gradients(const ParamRefs& params, const Gradients& grads) {
  GradientBuffers out;
  out.reserve(params.size());
  for (const auto& [name, t] : params) {
    const std::vector<double>* g = nullptr;
    if (auto id = t->node_id()) g = grads.find(*id);
    out.push_back(g ? *g : std::vector<double>(t->size(), 0.0));
  }
  return out;
}

double clip_global_norm(GradientBuffers& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grads)
      for (double& v : g) v *= s;
  }
  return norm;
}

void adamw_step(ParamRefs& params, const GradientBuffers& grads, AdamWState& state, double lr,
                const AdamWConfig& config) {
  if (grads.size() != params.size()) throw ContractError("adamw_step: gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].second->size()) {
      throw DimensionError("adamw_step: gradient of " + params[i].first + " has the wrong size");
    }
    for (double g : grads[i]) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient for parameter " + params[i].first);
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& [name, t] : params) {
      state.first_moment.emplace_back(t->size(), 0.0);
      state.second_moment.emplace_back(t->size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) throw ContractError("adamw_step: state/parameter mismatch");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].second;
    std::vector<double> w = p.values();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] -= lr * config.weight_decay * w[k];
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + config.eps);
    }
    p = Tensor::parameter(p.shape(), std::move(w));
  }
}

}  // namespace erc
