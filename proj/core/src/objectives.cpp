#include "erc/objectives.hpp"

#include <algorithm>
#include <limits>

#include "erc/errors.hpp"
#include "erc/ops.hpp"
#include "erc/text.hpp"

namespace erc {

std::string to_string(SclVariant v) {
  return v == SclVariant::kPaperLiteral ? "paper-literal" : "standard-supcon";
}

SclVariant parse_scl_variant(const std::string& s) {
  if (s == "paper-literal") return SclVariant::kPaperLiteral;
  if (s == "standard-supcon") return SclVariant::kStandardSupCon;
  throw ConfigError("unknown scl_variant '" + s + "' (expected paper-literal or standard-supcon)");
}

void LossWeights::validate() const {
  if (alpha < 0.0 || beta < 0.0) throw ConfigError("alpha and beta must be non-negative");
  if (alpha + beta >= 1.0) {
    throw ConfigError("alpha + beta must stay below 1 (got " + std::to_string(alpha + beta) + ")");
  }
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
}

ComponentWeights reassign_weights(const LossWeights& w, bool scl_active, bool gen_active) {
  w.validate();
  ComponentWeights out;
  out.scl = scl_active ? w.alpha : 0.0;
  out.gen = gen_active ? w.beta : 0.0;
  out.ce = 1.0 - out.scl - out.gen;
  return out;
}

MultiviewBatch build_multiview(const Tensor& context, std::span<const int> labels) {
  if (context.rank() != 2) {
    throw DimensionError("build_multiview: expected [N×d], got " + shape_str(context.shape()));
  }
  const std::size_t n = context.rows();
  if (labels.size() != n) {
    throw DimensionError("build_multiview: " + std::to_string(labels.size()) + " labels for " +
                         shape_str(context.shape()));
  }
  if (n < 2) {
    throw ContractError("build_multiview: degenerate batch of " + std::to_string(n) +
                        " sample(s); need N >= 2");
  }
  MultiviewBatch b;
  const Tensor parts[] = {context, ops::detach(context)};
  b.views = ops::concat_rows(parts);
  b.labels.assign(labels.begin(), labels.end());
  b.labels.insert(b.labels.end(), labels.begin(), labels.end());
  b.live = n;
  return b;
}

Tensor scl_loss(const MultiviewBatch& batch, double tau, SclVariant variant, bool normalize) {
  return scl_loss_rows(batch.views, batch.labels, batch.live, tau, variant, normalize);
}

Tensor scl_loss_rows(const Tensor& views, std::span<const int> labels, std::size_t live, double tau,
                     SclVariant variant, bool normalize) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (live < 2) throw ContractError("scl_loss: need at least 2 live samples");
  const std::size_t m = 2 * live;
  if (views.rank() != 2 || views.rows() != m || labels.size() != m) {
    throw DimensionError("scl_loss: views " + shape_str(views.shape()) + " with " +
                         std::to_string(labels.size()) + " labels, expected " + std::to_string(m) + " rows");
  }

  const Tensor x = normalize ? ops::l2_normalize_rows(views) : views;
  const Tensor sim = ops::scale(ops::matmul(x, ops::transpose(x)), 1.0 / tau);

  // Candidate mask for the denominator, positive weights for the numerator.
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> mask(m * m, 0.0);
  std::vector<double> pos_weight(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t partner = (i + live) % m;
    mask[i * m + i] = kNegInf;
    if (variant == SclVariant::kPaperLiteral) mask[i * m + partner] = kNegInf;
    std::size_t positives = 0;
    for (std::size_t p = 0; p < m; ++p)
      if (p != i && labels[p] == labels[i]) ++positives;
    // The partner shares the anchor's label, so positives >= 1.
    if (positives == 0) throw ContractError("scl_loss: anchor without positives; rows i and i+N must share labels");
    for (std::size_t p = 0; p < m; ++p)
      if (p != i && labels[p] == labels[i]) pos_weight[i * m + p] = 1.0 / static_cast<double>(positives);
  }

  const Tensor log_denominator = ops::logsumexp_rows(ops::add(sim, Tensor::constant({m, m}, std::move(mask))));
  const Tensor numerator = ops::sum(ops::mul(sim, Tensor::constant({m, m}, std::move(pos_weight))));
  return ops::sub(ops::sum(log_denominator), numerator);
}

ClassifierHead ClassifierHead::init(std::size_t dim, std::size_t classes, Rng& rng) {
  if (classes == 0) throw ConfigError("classifier needs at least one class");
  return {init_normal({dim, classes}, rng), Tensor::parameter({classes}, std::vector<double>(classes, 0.0))};
}

void ClassifierHead::collect(const std::string& prefix, ParamRefs& out) {
  out.emplace_back(prefix + ".weight", &weight);
  out.emplace_back(prefix + ".bias", &bias);
}

Classification classify(const Tensor& context, const ClassifierHead& head) {
  Classification out;
  out.probabilities = ops::softmax_rows(ops::add_row(ops::matmul(context, head.weight), head.bias));
  const std::size_t n = out.probabilities.rows(), c = out.probabilities.cols();
  out.predictions.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = out.probabilities.data().subspan(r * c, c);
    out.predictions[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

Tensor ce_loss(const Tensor& probabilities, std::span<const int> labels, LossDiagnostics* diag) {
  if (probabilities.rank() != 2 || probabilities.rows() != labels.size() || labels.empty()) {
    throw DimensionError("ce_loss: probabilities " + shape_str(probabilities.shape()) + " with " +
                         std::to_string(labels.size()) + " labels");
  }
  const Tensor gold = ops::pick(probabilities, labels);
  if (diag) {
    for (double p : gold.data())
      if (p < kProbabilityFloor) ++diag->ce_clamped;
  }
  return ops::scale(ops::mean(ops::log(ops::clamp_min(gold, kProbabilityFloor))), -1.0);
}

Tensor gen_loss(std::span<const GenerationPair> pairs, const SeqModelParams& model, LossDiagnostics* diag) {
  if (pairs.empty()) {
    if (diag) ++diag->gen_empty;
    return Tensor::scalar(0.0);
  }
  std::vector<Tensor> per_pair;
  per_pair.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const auto logits = decode_logits(pair.source_states, pair.target, model, pair.source_is_pad);
    const auto gold = ops::pick(ops::log_softmax_rows(logits), pair.target);
    const bool any_pad = std::find(pair.target.begin(), pair.target.end(), Vocab::kPad) != pair.target.end();
    if (any_pad) {
      const std::size_t t = pair.target.size();
      std::vector<double> keep(t);
      for (std::size_t j = 0; j < t; ++j) keep[j] = pair.target[j] == Vocab::kPad ? 0.0 : 1.0;
      per_pair.push_back(ops::sum(ops::mul(gold, Tensor::constant({t}, std::move(keep)))));
    } else {
      per_pair.push_back(ops::sum(gold));
    }
  }
  Tensor total = per_pair.front();
  for (std::size_t i = 1; i < per_pair.size(); ++i) total = ops::add(total, per_pair[i]);
  return ops::scale(total, -1.0 / static_cast<double>(pairs.size()));
}

Tensor total_loss(const Tensor& ce, const Tensor& scl, const Tensor& gen, const LossWeights& w) {
  w.validate();
  return total_loss(ce, scl, gen, ComponentWeights{1.0 - w.alpha - w.beta, w.alpha, w.beta});
}

Tensor total_loss(const Tensor& ce, const Tensor& scl, const Tensor& gen, const ComponentWeights& w) {
  Tensor out;
  auto accumulate = [&out](const Tensor& part, double weight, const char* name) {
    if (weight == 0.0) return;
    if (!part.defined() || part.size() != 1) {
      throw ContractError(std::string("total_loss: ") + name + " component must be a scalar");
    }
    const auto term = ops::scale(part, weight);
    out = out.defined() ? ops::add(out, term) : term;
  };
  accumulate(ce, w.ce, "ce");
  accumulate(scl, w.scl, "scl");
  accumulate(gen, w.gen, "gen");
  return out.defined() ? out : Tensor::scalar(0.0);
}

}  // namespace erc
