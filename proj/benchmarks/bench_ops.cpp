#include <benchmark/benchmark.h>

#include <random>

#include "erc/attention.hpp"
#include "erc/ops.hpp"
#include "erc/tensor.hpp"

namespace {

erc::Tensor random_tensor(erc::Shape shape, std::uint64_t seed, bool param = false) {
  erc::Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(erc::shape_size(shape));
  for (auto& x : v) x = u(rng);
  return param ? erc::Tensor::parameter(shape, std::move(v)) : erc::Tensor::constant(shape, std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor({n, n}, 1);
  const auto b = random_tensor({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(erc::ops::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 128);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor({n, n}, 1, true);
  const auto b = random_tensor({n, n}, 2, true);
  for (auto _ : state) benchmark::DoNotOptimize(erc::backward(erc::ops::sum(erc::ops::matmul(a, b))));
}
BENCHMARK(BM_MatmulBackward)->RangeMultiplier(2)->Range(16, 128);

void BM_SoftmaxRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_tensor({n, n}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(erc::ops::softmax_rows(x));
}
BENCHMARK(BM_SoftmaxRows)->RangeMultiplier(4)->Range(16, 256);

void BM_Attention(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 64;
  erc::Rng rng(4);
  const auto params = erc::AttentionParams::init(d, 4, rng);
  const auto x = random_tensor({len, d}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(erc::multi_head_attention(x, x, params));
}
BENCHMARK(BM_Attention)->RangeMultiplier(2)->Range(8, 64);

}  // namespace
