#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "erc/attention.hpp"
#include "erc/dialogue_context.hpp"
#include "erc/errors.hpp"
#include "erc/ops.hpp"
#include "oracles.hpp"

using namespace erc;
using erc::testing::check_gradients;
using erc::testing::random_parameter;
using erc::testing::random_projection;
using erc::testing::randomize_parameters;

namespace {

DialogueTransformerConfig small(bool positions) {
  DialogueTransformerConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.ff_dim = 16;
  c.max_window = 6;
  c.window_positions = positions;
  return c;
}

Linear identity_linear(std::size_t d) {
  std::vector<double> w(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) w[i * d + i] = 1.0;
  return {Tensor::parameter({d, d}, w), Tensor::parameter({d}, std::vector<double>(d, 0.0))};
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
  std::vector<double> v;
  for (auto r : perm)
    for (std::size_t c = 0; c < x.cols(); ++c) v.push_back(x.at(r, c));
  return Tensor::constant(x.shape(), v);
}

}  // namespace

TEST_CASE("single key attention returns the projected value") {
  Rng rng(1);
  auto a = AttentionParams::init(4, 2, rng);
  a.query = identity_linear(4);
  a.key = identity_linear(4);
  a.value = identity_linear(4);
  const auto q = random_parameter({1, 4}, rng);
  const auto kv = random_parameter({1, 4}, rng);
  const auto out = multi_head_attention(q, kv, a);
  const auto want = a.output.forward(kv);
  for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("identical keys give uniform weights and the mean value") {
  Rng rng(2);
  auto a = AttentionParams::init(4, 2, rng);
  a.output = identity_linear(4);
  a.key = {Tensor::parameter({4, 4}, std::vector<double>(16, 0.0)), random_parameter({4}, rng)};
  const auto q = random_parameter({2, 4}, rng);
  const auto kv = random_parameter({3, 4}, rng);
  const auto res = attend(q, kv, a);
  REQUIRE(res.weights.size() == 2);
  for (const auto& w : res.weights)
    for (double v : w.data()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
  const auto values = a.value.forward(kv);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const double mean = (values.at(0, c) + values.at(1, c) + values.at(2, c)) / 3.0;
      CHECK(res.output.at(r, c) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("attention shapes, weight rows and errors") {
  Rng rng(3);
  const auto a = AttentionParams::init(8, 4, rng);
  for (std::size_t qa : {1, 3}) {
    for (std::size_t kb : {1, 2, 5}) {
      const auto res = attend(random_parameter({qa, 8}, rng), random_parameter({kb, 8}, rng), a);
      CHECK(res.output.shape() == Shape{qa, 8});
      for (const auto& w : res.weights)
        for (std::size_t r = 0; r < qa; ++r) {
          double s = 0;
          for (std::size_t c = 0; c < kb; ++c) s += w.at(r, c);
          CHECK(std::abs(s - 1.0) <= 1e-12);
        }
    }
  }
  CHECK_THROWS_AS((void)multi_head_attention(random_parameter({2, 6}, rng), random_parameter({2, 6}, rng), a),
                  DimensionError);
  CHECK_THROWS_AS((void)AttentionParams::init(8, 3, rng), ConfigError);
}

TEST_CASE("causal and padding masks") {
  const auto m = causal_mask(3);
  CHECK(m.at(0, 0) == 0.0);
  CHECK(std::isinf(m.at(0, 1)));
  CHECK(m.at(2, 1) == 0.0);
  const auto k = key_padding_mask(2, {false, true});
  CHECK(k.at(1, 0) == 0.0);
  CHECK(std::isinf(k.at(1, 1)));
}

TEST_CASE("disabled context layer is the identity") {
  Rng rng(4);
  const auto p = DialogueTransformerParams::init(small(true), rng);
  const auto x = random_parameter({4, 8}, rng);
  CHECK(contextualize(x, p, false).values() == x.values());
  CHECK(contextualize(x, p, true).shape() == Shape{4, 8});
  CHECK_THROWS_AS((void)contextualize(random_parameter({7, 8}, rng), p), ContractError);
}

TEST_CASE("permutation equivariance without positions, broken with them") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    for (bool positions : {false, true}) {
      auto p = DialogueTransformerParams::init(small(positions), rng);
      ParamRefs refs;
      p.collect("dialog", refs);
      randomize_parameters(refs, rng);
      const std::size_t w = 3 + static_cast<std::size_t>(trial) % 3;
      const auto x = random_parameter({w, 8}, rng);
      std::vector<std::size_t> perm(w);
      std::iota(perm.begin(), perm.end(), 0);
      std::rotate(perm.begin(), perm.begin() + 1, perm.end());
      const auto lhs = contextualize(permute_rows(x, perm), p);
      const auto rhs = permute_rows(contextualize(x, p), perm);
      double diff = 0;
      for (std::size_t i = 0; i < lhs.size(); ++i) diff = std::max(diff, std::abs(lhs[i] - rhs[i]));
      if (positions) {
        CHECK(diff > 1e-3);
      } else {
        CHECK(diff <= 1e-10);
      }
    }
  }
}

TEST_CASE("context layer gradients match finite differences") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    auto cfg = small(true);
    cfg.layers = 1 + trial % 2;
    auto p = DialogueTransformerParams::init(cfg, rng);
    ParamRefs refs;
    p.collect("dialog", refs);
    randomize_parameters(refs, rng);
    auto x = random_parameter({4, 8}, rng);
    refs.emplace_back("input", &x);
    const auto r = check_gradients([&] { return random_projection(contextualize(x, p), 9); }, refs, rng, 3);
    CHECK(r.ok());
  }
}
