#include "erc/layers.hpp"

#include "erc/ops.hpp"

namespace erc {

Tensor init_normal(Shape shape, Rng& rng, double std) {
  std::normal_distribution<double> dist(0.0, std);
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::parameter(std::move(shape), std::move(v));
}

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng) {
  return {init_normal({in, out}, rng), Tensor::parameter({out}, std::vector<double>(out, 0.0))};
}

Tensor Linear::forward(const Tensor& x) const { return ops::add_row(ops::matmul(x, weight), bias); }

void Linear::collect(const std::string& prefix, ParamRefs& out) {
  out.emplace_back(prefix + ".weight", &weight);
  out.emplace_back(prefix + ".bias", &bias);
}

LayerNorm LayerNorm::init(std::size_t dim) {
  return {Tensor::parameter({dim}, std::vector<double>(dim, 1.0)),
          Tensor::parameter({dim}, std::vector<double>(dim, 0.0))};
}

Tensor LayerNorm::forward(const Tensor& x) const { return ops::layer_norm(x, gain, shift); }

void LayerNorm::collect(const std::string& prefix, ParamRefs& out) {
  out.emplace_back(prefix + ".gain", &gain);
  out.emplace_back(prefix + ".shift", &shift);
}

FeedForward FeedForward::init(std::size_t dim, std::size_t ff_dim, Rng& rng) {
  auto hidden = Linear::init(dim, ff_dim, rng);
  auto output = Linear::init(ff_dim, dim, rng);
  return {std::move(hidden), std::move(output)};
}

Tensor FeedForward::forward(const Tensor& x) const {
  return output.forward(ops::gelu(hidden.forward(x)));
}

void FeedForward::collect(const std::string& prefix, ParamRefs& out) {
  hidden.collect(prefix + ".hidden", out);
  output.collect(prefix + ".output", out);
}

}  // namespace erc
