#include <doctest.h>

#include <cmath>
#include <numeric>

#include "erc/errors.hpp"
#include "erc/objectives.hpp"
#include "erc/ops.hpp"
#include "erc/seq_model.hpp"
#include "erc/text.hpp"
#include "oracles.hpp"

using namespace erc;
using erc::testing::check_gradients;
using erc::testing::Matrix;
using erc::testing::oracle_scl;
using erc::testing::random_parameter;
using erc::testing::random_projection;
using erc::testing::randomize_parameters;
using erc::testing::to_matrix;

namespace {

const double kLn2 = std::log(2.0);

Tensor rows_tensor(const Matrix& m, bool param = false) {
  std::vector<double> v;
  for (const auto& r : m) v.insert(v.end(), r.begin(), r.end());
  const Shape s{m.size(), m[0].size()};
  return param ? Tensor::parameter(s, v) : Tensor::constant(s, v);
}

std::vector<int> random_labels(std::size_t n, int classes, Rng& rng) {
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<int> out(n);
  for (auto& l : out) l = u(rng);
  return out;
}

Tensor with_copy(const Tensor& live, const Tensor& copy) {
  const Tensor parts[] = {live, copy};
  return ops::concat_rows(parts);
}

std::vector<int> doubled(const std::vector<int>& labels) {
  auto out = labels;
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

}  // namespace

TEST_CASE("build_multiview") {
  const auto h = Tensor::parameter({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto b = build_multiview(h, std::vector<int>{0, 1});
  CHECK(b.views.shape() == Shape{4, 3});
  CHECK(b.labels == std::vector<int>{0, 1, 0, 1});
  CHECK(b.live == 2);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(b.views.at(2, c) == b.views.at(0, c));
    CHECK(b.views.at(3, c) == b.views.at(1, c));
  }
  CHECK_THROWS_AS((void)build_multiview(Tensor::parameter({1, 3}, {1, 2, 3}), std::vector<int>{0}), ContractError);
  CHECK_THROWS_AS((void)build_multiview(h, std::vector<int>{0}), DimensionError);
}

TEST_CASE("contrastive hand values") {
  const Matrix same{{0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}};
  for (double tau : {0.07, 0.5, 1.0, 3.0}) {
    const auto l = scl_loss_rows(rows_tensor(same), std::vector<int>{0, 0, 0, 0}, 2, tau, SclVariant::kPaperLiteral);
    CHECK(std::abs(l.item() - 4 * kLn2) <= 1e-9);
  }
  const Matrix ortho{{1, 0}, {0, 1}, {1, 0}, {0, 1}};
  const auto l = scl_loss_rows(rows_tensor(ortho), std::vector<int>{0, 1, 0, 1}, 2, 1.0, SclVariant::kPaperLiteral);
  CHECK(std::abs(l.item() - (4 * kLn2 - 4)) <= 1e-9);
  for (double tau : {0.25, 2.0}) {
    const auto lt =
        scl_loss_rows(rows_tensor(ortho), std::vector<int>{0, 1, 0, 1}, 2, tau, SclVariant::kPaperLiteral);
    CHECK(std::abs(lt.item() - (4 * kLn2 - 4 / tau)) <= 1e-9);
  }
  CHECK_THROWS_AS(
      (void)scl_loss_rows(rows_tensor(ortho), std::vector<int>{0, 1, 0, 1}, 2, 0.0, SclVariant::kPaperLiteral),
      ConfigError);
}

TEST_CASE("contrastive loss matches direct evaluation") {
  Rng rng(10);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 7;
    const int classes = 2 + trial % 3;
    const auto live = random_parameter({n, 5}, rng);
    const auto labels = random_labels(n, classes, rng);
    const auto b = build_multiview(live, labels);
    for (auto variant : {SclVariant::kPaperLiteral, SclVariant::kStandardSupCon})
      for (bool normalize : {true, false}) {
        const double tau = normalize ? 0.3 : 2.0;
        const double got = scl_loss(b, tau, variant, normalize).item();
        const double want = oracle_scl(to_matrix(b.views), b.labels, n, tau, variant, normalize);
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
      }
  }
}

TEST_CASE("contrastive loss is invariant to sample order") {
  Rng rng(11);
  const auto live = random_parameter({5, 4}, rng);
  const std::vector<int> labels{0, 1, 0, 2, 1};
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  std::vector<double> v;
  std::vector<int> pl;
  for (auto r : perm) {
    for (std::size_t c = 0; c < 4; ++c) v.push_back(live.at(r, c));
    pl.push_back(labels[r]);
  }
  const auto permuted = Tensor::constant({5, 4}, v);
  for (auto variant : {SclVariant::kPaperLiteral, SclVariant::kStandardSupCon}) {
    const double a = scl_loss(build_multiview(live, labels), 0.1, variant).item();
    const double b = scl_loss(build_multiview(permuted, pl), 0.1, variant).item();
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("contrastive gradients with the copy held fixed") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 7;
    const int classes = 2 + trial % 3;
    auto live = random_parameter({n, 6}, rng);
    const auto labels = random_labels(n, classes, rng);
    const auto copy = ops::detach(live);
    for (auto variant : {SclVariant::kPaperLiteral, SclVariant::kStandardSupCon}) {
      // The analytic gradient flows through build_multiview; the numeric one
      // perturbs only the live rows of an explicit matrix with a fixed copy.
      const auto analytic = backward(scl_loss(build_multiview(live, labels), 0.5, variant)).of(live);
      auto fixed = [&] { return scl_loss_rows(with_copy(live, copy), doubled(labels), n, 0.5, variant); };
      const auto fd = check_gradients(fixed, std::vector<Tensor*>{&live}, rng, 12);
      CHECK(fd.ok());
      const auto explicit_grad = backward(fixed()).of(live);
      CHECK(analytic.values() == explicit_grad.values());
    }
  }
}

TEST_CASE("copy rows receive no gradient") {
  Rng rng(13);
  auto live = random_parameter({4, 3}, rng);
  const std::vector<int> labels{0, 1, 1, 0};
  const auto b = build_multiview(live, labels);
  const auto grads = backward(scl_loss(b, 0.2, SclVariant::kPaperLiteral));
  // The loss does depend on the copy rows of X, but none of that gradient
  // reaches the live tensor: its gradient is exactly the live block.
  const auto g_views = grads.of(b.views);
  const auto g_live = grads.of(live);
  double copy_block = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(g_live[i] == g_views[i]);
    copy_block += std::abs(g_views[12 + i]);
  }
  CHECK(copy_block > 0.0);
  const auto copy = ops::detach(live);
  CHECK_FALSE(copy.node_id().has_value());
  const auto g_copy = backward(scl_loss_rows(with_copy(live, copy), doubled(labels), 4, 0.2,
                                             SclVariant::kPaperLiteral)).of(copy);
  for (std::size_t i = 0; i < 12; ++i) CHECK(g_copy[i] == 0.0);
}

TEST_CASE("singleton classes keep the loss finite") {
  Rng rng(14);
  auto live = random_parameter({3, 4}, rng);
  for (auto variant : {SclVariant::kPaperLiteral, SclVariant::kStandardSupCon}) {
    const auto l = scl_loss(build_multiview(live, std::vector<int>{0, 1, 2}), 0.07, variant);
    CHECK(std::isfinite(l.item()));
    const auto g = backward(l).of(live);
    for (double v : g.data()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("pulling classes together lowers the standard loss") {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 6;
    const std::vector<int> labels{0, 0, 1, 1, 2, 2};
    const auto start = to_matrix(random_parameter({n, 4}, rng));
    Matrix means(3, std::vector<double>(4, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 4; ++c) means[labels[i]][c] += start[i][c] / 2.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int step = 0; step <= 10; ++step) {
      const double t = step / 10.0;
      Matrix rows(n, std::vector<double>(4));
      for (std::size_t i = 0; i < n; ++i) {
        double norm = 0;
        for (std::size_t c = 0; c < 4; ++c) {
          rows[i][c] = (1 - t) * start[i][c] + t * means[labels[i]][c];
          norm += rows[i][c] * rows[i][c];
        }
        for (auto& v : rows[i]) v /= std::sqrt(norm);
      }
      const double l =
          scl_loss(build_multiview(rows_tensor(rows), labels), 0.5, SclVariant::kStandardSupCon).item();
      CHECK(l < prev);
      prev = l;
    }
  }
}

TEST_CASE("classify") {
  const ClassifierHead zero{Tensor::parameter({3, 4}, std::vector<double>(12, 0.0)),
                            Tensor::parameter({4}, std::vector<double>(4, 0.0))};
  const auto c = classify(Tensor::constant({2, 3}, {1, 2, 3, -1, 0, 4}), zero);
  for (double p : c.probabilities.data()) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(c.predictions == std::vector<int>{0, 0});

  Rng rng(16);
  ClassifierHead head = ClassifierHead::init(3, 4, rng);
  const auto x = random_parameter({5, 3}, rng);
  const auto a = classify(x, head);
  for (std::size_t r = 0; r < 5; ++r) {
    double s = 0;
    for (std::size_t k = 0; k < 4; ++k) s += a.probabilities.at(r, k);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  head.bias = Tensor::parameter({4}, std::vector<double>(4, 3.5));
  CHECK(classify(x, head).predictions == a.predictions);
}

TEST_CASE("cross-entropy") {
  const auto one_hot = Tensor::constant({2, 3}, {0, 1, 0, 1, 0, 0});
  CHECK(ce_loss(one_hot, std::vector<int>{1, 0}).item() == 0.0);
  const auto uniform = Tensor::constant({3, 4}, std::vector<double>(12, 0.25));
  CHECK(ce_loss(uniform, std::vector<int>{0, 3, 1}).item() == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  const auto p = Tensor::constant({2, 2}, {0.5, 0.5, 0.75, 0.25});
  CHECK(ce_loss(p, std::vector<int>{0, 1}).item() == doctest::Approx(1.5 * kLn2).epsilon(1e-14));

  LossDiagnostics diag;
  const auto zero = Tensor::constant({1, 2}, {1.0, 0.0});
  CHECK(ce_loss(zero, std::vector<int>{1}, &diag).item() == doctest::Approx(-std::log(1e-12)));
  CHECK(diag.ce_clamped == 1);

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto probs = ops::softmax_rows(random_parameter({4, 5}, rng));
    const auto labels = random_labels(4, 5, rng);
    double want = 0;
    for (std::size_t i = 0; i < 4; ++i) want -= std::log(probs.at(i, static_cast<std::size_t>(labels[i])));
    CHECK(std::abs(ce_loss(probs, labels).item() - want / 4) <= 1e-12);
  }
}

TEST_CASE("generation loss") {
  Rng rng(18);
  SeqModelConfig cfg;
  cfg.vocab_size = 10;
  cfg.d_model = 8;
  cfg.encoder_layers = 1;
  cfg.decoder_layers = 1;
  cfg.heads = 2;
  cfg.ff_dim = 8;
  cfg.max_len = 8;
  auto model = SeqModelParams::init(cfg, rng);

  LossDiagnostics diag;
  CHECK(gen_loss({}, model, &diag).item() == 0.0);
  CHECK(diag.gen_empty == 1);

  const auto src = encode(std::vector<int>{0, 5, 6, 1}, model);
  const std::vector<int> single{Vocab::kEos};
  GenerationPair pair{src.hidden_states, src.is_pad, single};
  const auto logits = decode_logits(src.hidden_states, single, model);
  double z = 0;
  for (std::size_t v = 0; v < 10; ++v) z += std::exp(logits.at(0, v));
  const double p = std::exp(logits.at(0, Vocab::kEos)) / z;
  CHECK(gen_loss({&pair, 1}, model).item() == doctest::Approx(-std::log(p)).epsilon(1e-12));

  // Pad positions in the target contribute nothing.
  GenerationPair framed{src.hidden_states, src.is_pad, {0, 7, 1}};
  GenerationPair padded{src.hidden_states, src.is_pad, {0, 7, 1, Vocab::kPad, Vocab::kPad}};
  CHECK(gen_loss({&padded, 1}, model).item() ==
        doctest::Approx(gen_loss({&framed, 1}, model).item()).epsilon(1e-12));

  // Decoder rigged so every row puts all its mass on </s>.
  std::vector<double> emb(10 * 8, 0.0);
  for (std::size_t v = 0; v < 10; ++v) emb[v * 8 + 1 + v % 7] = 1.0;
  emb[Vocab::kEos * 8] = 1.0;
  model.embedding = Tensor::parameter({10, 8}, emb);
  model.decoder_norm.gain = Tensor::parameter({8}, std::vector<double>(8, 0.0));
  std::vector<double> shift(8, 0.0);
  shift[0] = 1e4;
  model.decoder_norm.shift = Tensor::parameter({8}, shift);
  const auto src2 = encode(std::vector<int>{0, 5, 1}, model);
  GenerationPair sure{src2.hidden_states, src2.is_pad, {Vocab::kEos, Vocab::kEos}};
  CHECK(gen_loss({&sure, 1}, model).item() == 0.0);
}

TEST_CASE("loss weights and total") {
  const auto ce = Tensor::scalar(2.0), scl = Tensor::scalar(-3.0), gen = Tensor::scalar(5.0);
  CHECK(total_loss(ce, scl, gen, LossWeights{0.0, 0.0, 0.07}).item() == 2.0);
  CHECK(total_loss(ce, scl, gen, LossWeights{0.2, 0.1, 0.07}).item() ==
        doctest::Approx(0.7 * 2 + 0.2 * -3 + 0.1 * 5).epsilon(1e-15));
  const auto one = Tensor::scalar(1.0);
  for (double a : {0.0, 0.2, 0.5})
    for (double b : {0.0, 0.1, 0.4}) CHECK(total_loss(one, one, one, LossWeights{a, b, 1}).item() ==
                                           doctest::Approx(1.0).epsilon(1e-15));
  // Linear in each component with the stated coefficient.
  const LossWeights w{0.3, 0.15, 1};
  const auto zero = Tensor::scalar(0.0);
  CHECK(total_loss(one, zero, zero, w).item() == doctest::Approx(0.55));
  CHECK(total_loss(zero, one, zero, w).item() == doctest::Approx(0.3));
  CHECK(total_loss(zero, zero, one, w).item() == doctest::Approx(0.15));

  CHECK_THROWS_AS((void)total_loss(ce, scl, gen, LossWeights{0.6, 0.4, 1}), ConfigError);
  CHECK_THROWS_AS(LossWeights({-0.1, 0.1, 1}).validate(), ConfigError);
  CHECK_THROWS_AS(LossWeights({0.1, 0.1, 0}).validate(), ConfigError);

  for (bool s : {false, true})
    for (bool g : {false, true}) {
      const auto cw = reassign_weights({0.2, 0.1, 0.07}, s, g);
      CHECK(cw.ce + cw.scl + cw.gen == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(cw.scl == (s ? 0.2 : 0.0));
      CHECK(cw.gen == (g ? 0.1 : 0.0));
      // Disabled components are skipped entirely, even when undefined.
      CHECK(total_loss(ce, s ? scl : Tensor{}, g ? gen : Tensor{}, cw).item() ==
            doctest::Approx(cw.ce * 2 + cw.scl * -3 + cw.gen * 5));
    }
  CHECK(parse_scl_variant(to_string(SclVariant::kStandardSupCon)) == SclVariant::kStandardSupCon);
  CHECK(parse_scl_variant(to_string(SclVariant::kPaperLiteral)) == SclVariant::kPaperLiteral);
  CHECK_THROWS_AS((void)parse_scl_variant("cosine"), ConfigError);
}

TEST_CASE("classifier and cross-entropy gradients") {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    ClassifierHead head = ClassifierHead::init(5, 4, rng);
    ParamRefs refs;
    head.collect("head", refs);
    randomize_parameters(refs, rng, 1.0);
    auto x = random_parameter({3, 5}, rng);
    refs.emplace_back("x", &x);
    const auto labels = random_labels(3, 4, rng);
    const auto r = check_gradients([&] { return ce_loss(classify(x, head).probabilities, labels); }, refs, rng, 6);
    CHECK(r.ok());
  }
}
