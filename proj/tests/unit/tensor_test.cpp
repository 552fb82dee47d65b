#include <doctest.h>

#include <cmath>
#include <limits>

#include "erc/errors.hpp"
#include "erc/ops.hpp"
#include "erc/tensor.hpp"
#include "oracles.hpp"

using namespace erc;
using erc::testing::check_gradients;
using erc::testing::random_parameter;
using erc::testing::random_projection;

namespace {

Tensor mat(std::size_t r, std::size_t c, std::vector<double> v) { return Tensor::constant({r, c}, std::move(v)); }
Tensor pmat(std::size_t r, std::size_t c, std::vector<double> v) { return Tensor::parameter({r, c}, std::move(v)); }

void check_values(const Tensor& t, const std::vector<double>& want, double tol = 1e-12) {
  REQUIRE(t.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(t[i] == doctest::Approx(want[i]).epsilon(tol));
}

}  // namespace

TEST_CASE("matmul examples") {
  const auto a = mat(2, 2, {1, 2, 3, 4});
  check_values(ops::matmul(mat(2, 2, {1, 0, 0, 1}), a), {1, 2, 3, 4});
  check_values(ops::matmul(Tensor::zeros({2, 2}), a), {0, 0, 0, 0});
  check_values(ops::matmul(a, mat(2, 2, {5, 6, 7, 8})), {19, 22, 43, 50});
}

TEST_CASE("matmul shape mismatch names both shapes") {
  try {
    (void)ops::matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
  }
}

TEST_CASE("softmax examples") {
  check_values(ops::softmax_rows(mat(1, 3, {2.5, 2.5, 2.5})), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  check_values(ops::softmax_rows(mat(1, 2, {0.0, std::log(2.0)})), {1.0 / 3, 2.0 / 3});

  Rng rng(3);
  const auto x = random_parameter({4, 5}, rng);
  const auto shifted = ops::add_scalar(x, 17.25);
  const auto a = ops::softmax_rows(x), b = ops::softmax_rows(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 5; ++c) s += a.at(r, c);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("softmax survives large logits and rejects NaN") {
  const auto p = ops::softmax_rows(mat(1, 2, {1000.0, 0.0}));
  CHECK(p[0] == 1.0);
  CHECK(std::isfinite(p[1]));
  CHECK_THROWS_AS((void)ops::softmax_rows(mat(1, 2, {std::nan(""), 0.0})), NumericError);
  const double inf = std::numeric_limits<double>::infinity();
  check_values(ops::softmax_rows(mat(1, 3, {0.0, -inf, 0.0})), {0.5, 0.0, 0.5});
  CHECK_THROWS_AS((void)ops::softmax_rows(mat(1, 2, {-inf, -inf})), NumericError);
}

TEST_CASE("max_pool_rows examples and tie routing") {
  check_values(ops::max_pool_rows(mat(2, 2, {1, 5, 3, 2})), {3, 5});
  check_values(ops::max_pool_rows(mat(1, 2, {7, -1})), {7, -1});
  check_values(ops::max_pool_rows(mat(2, 2, {-1, -2, -3, -1})), {-1, -1});
  CHECK_THROWS_AS((void)ops::max_pool_rows(Tensor::zeros({0, 2})), DimensionError);

  const auto x = pmat(3, 1, {4, 4, 4});
  const auto g = backward(ops::sum(ops::max_pool_rows(x))).of(x);
  check_values(g, {1, 0, 0});
}

TEST_CASE("detach examples") {
  const auto x = pmat(2, 2, {1.5, -2, 0.25, 3});
  const auto d = ops::detach(x);
  CHECK(d.values() == x.values());
  CHECK_FALSE(d.requires_grad());
  CHECK_FALSE(d.node_id().has_value());

  const auto grads = backward(ops::sum(ops::mul(x, d)));
  check_values(grads.of(x), x.values());
  check_values(grads.of(d), {0, 0, 0, 0});
}

TEST_CASE("backward examples") {
  Rng rng(11);
  auto x = random_parameter({1, 4}, rng);
  const auto g = backward(ops::sum(ops::mul(x, x))).of(x);
  for (std::size_t i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(2 * x[i]).epsilon(1e-12));

  const auto y = random_parameter({3}, rng);
  const auto c = Tensor::constant({2, 2}, {1, 2, 3, 4});
  const auto gy = backward(ops::sum(ops::mul(c, c))).of(y);
  check_values(gy, {0, 0, 0});

  auto a = Tensor::constant({2, 3}, {1, -2, 0.5, 3, 4, -1});
  auto v = random_parameter({3, 1}, rng);
  const auto gv = backward(ops::sum(ops::matmul(a, v))).of(v);
  check_values(gv, {4, 2, -0.5});

  CHECK_THROWS_AS((void)backward(Tensor::zeros({2})), ContractError);
}

TEST_CASE("backward is deterministic") {
  Rng rng(5);
  auto w = random_parameter({3, 3}, rng);
  auto x = random_parameter({2, 3}, rng);
  auto f = [&] { return random_projection(ops::gelu(ops::matmul(x, w)), 1); };
  const auto g1 = backward(f()), g2 = backward(f());
  CHECK(g1.of(w).values() == g2.of(w).values());
  CHECK(g1.of(x).values() == g2.of(x).values());
}

TEST_CASE("shared subexpressions accumulate gradient") {
  auto x = Tensor::parameter({1}, {3.0});
  const auto y = ops::mul(x, x);
  const auto g = backward(ops::sum(ops::add(y, ops::mul(y, x)))).of(x);
  // d/dx (x² + x³) = 2x + 3x²
  CHECK(g[0] == doctest::Approx(6.0 + 27.0));
}

TEST_CASE("every op matches finite differences") {
  Rng rng(2024);
  const std::vector<int> ids{2, 0, 3, 2};
  const std::vector<int> index{1, 0, 2};
  for (int trial = 0; trial < 10; ++trial) {
    CAPTURE(trial);
    auto a = random_parameter({3, 4}, rng);
    auto b = random_parameter({3, 4}, rng);
    auto m = random_parameter({4, 2}, rng);
    auto pos = random_parameter({3, 4}, rng, 0.5, 2.0);
    auto gain = random_parameter({4}, rng);
    auto shift = random_parameter({4}, rng);
    auto bias = random_parameter({4}, rng);
    auto table = random_parameter({5, 3}, rng);
    const std::uint64_t s = 100 + trial;
    const std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
        {"add", [&] { return random_projection(ops::add(a, b), s); }},
        {"sub", [&] { return random_projection(ops::sub(a, b), s); }},
        {"mul", [&] { return random_projection(ops::mul(a, b), s); }},
        {"scale", [&] { return random_projection(ops::scale(a, -1.75), s); }},
        {"add_row", [&] { return random_projection(ops::add_row(a, bias), s); }},
        {"matmul", [&] { return random_projection(ops::matmul(a, m), s); }},
        {"transpose", [&] { return random_projection(ops::transpose(a), s); }},
        {"mean", [&] { return ops::scale(ops::mean(ops::mul(a, b)), 3.0); }},
        {"exp", [&] { return random_projection(ops::exp(a), s); }},
        {"log", [&] { return random_projection(ops::log(pos), s); }},
        {"gelu", [&] { return random_projection(ops::gelu(a), s); }},
        {"softmax_rows", [&] { return random_projection(ops::softmax_rows(a), s); }},
        {"log_softmax_rows", [&] { return random_projection(ops::log_softmax_rows(a), s); }},
        {"logsumexp_rows", [&] { return random_projection(ops::logsumexp_rows(a), s); }},
        {"layer_norm", [&] { return random_projection(ops::layer_norm(a, gain, shift), s); }},
        {"l2_normalize_rows", [&] { return random_projection(ops::l2_normalize_rows(a), s); }},
        {"embedding_lookup", [&] { return random_projection(ops::embedding_lookup(table, ids), s); }},
        {"max_pool_rows", [&] { return random_projection(ops::max_pool_rows(a), s); }},
        {"concat_rows",
         [&] {
           const Tensor parts[] = {a, b};
           return random_projection(ops::concat_rows(parts), s);
         }},
        {"concat_cols",
         [&] {
           const Tensor parts[] = {a, b};
           return random_projection(ops::concat_cols(parts), s);
         }},
        {"slice_rows", [&] { return random_projection(ops::slice_rows(a, 1, 3), s); }},
        {"slice_cols", [&] { return random_projection(ops::slice_cols(a, 1, 3), s); }},
        {"pick", [&] { return random_projection(ops::pick(a, index), s); }},
        {"clamp_min", [&] { return random_projection(ops::clamp_min(a, 0.1), s); }},
    };
    for (const auto& [name, f] : cases) {
      CAPTURE(name);
      const auto r = check_gradients(f, {&a, &b, &m, &pos, &gain, &shift, &bias, &table}, rng, 12);
      CHECK(r.ok());
      CHECK(r.max_rel_error <= erc::testing::kGradTolerance);
    }
  }
}

TEST_CASE("log rejects non-positive input") {
  CHECK_THROWS_AS((void)ops::log(Tensor::constant({2}, {1.0, 0.0})), NumericError);
}

TEST_CASE("tensor contracts") {
  CHECK_THROWS((void)Tensor::constant({2, 2}, {1, 2, 3}));
  CHECK(Tensor::scalar(2.5).item() == 2.5);
  CHECK_THROWS_AS((void)Tensor::zeros({2}).item(), DimensionError);
  CHECK(Tensor::parameter({1}, {1}).node_id().has_value());
  CHECK_FALSE(Tensor::constant({1}, {1}).node_id().has_value());
  CHECK_THROWS_AS((void)ops::embedding_lookup(Tensor::zeros({3, 2}), std::vector<int>{3}), IndexError);
}
