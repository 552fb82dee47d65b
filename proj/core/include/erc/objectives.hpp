#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "erc/layers.hpp"
#include "erc/seq_model.hpp"
#include "erc/tensor.hpp"

namespace erc {

/// Rows 0..N-1 are the live context states, rows N..2N-1 their detached
/// copies; labels are duplicated in the same order.
struct MultiviewBatch {
  Tensor views;             // [2N×d]
  std::vector<int> labels;  // length 2N
  std::size_t live = 0;     // N
};

/// Which candidate set the contrastive denominator ranges over.
///  - kPaperLiteral: A(i) = I \ {i, partner(i)}; P(i) may contain the
///    partner even though A(i) does not.
///  - kStandardSupCon: A(i) = I \ {i}, so P(i) ⊆ A(i).
enum class SclVariant { kPaperLiteral, kStandardSupCon };

std::string to_string(SclVariant v);
SclVariant parse_scl_variant(const std::string& s);

struct LossWeights {
  double alpha = 0.2;  // contrastive
  double beta = 0.1;   // generation
  double tau = 0.07;

  /// ConfigError unless alpha, beta >= 0, alpha + beta < 1 and tau > 0.
  void validate() const;
};

/// Coefficients actually applied to each component in one step.
struct ComponentWeights {
  double ce = 1.0;
  double scl = 0.0;
  double gen = 0.0;
};

/// Drops the weight of every inactive component and gives it to the
/// cross-entropy term, so the coefficients stay a convex combination.
ComponentWeights reassign_weights(const LossWeights& w, bool scl_active, bool gen_active);

struct LossDiagnostics {
  std::size_t ce_clamped = 0;     // gold probabilities floored at 1e-12
  std::size_t gen_empty = 0;      // generation calls with no pairs
  std::size_t scl_skipped = 0;    // windows too small for a contrastive batch
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Stacks `context` with a gradient-detached copy of itself.
/// Throws ContractError for N < 2: with a single sample the candidate set of
/// the paper-literal loss is empty.
MultiviewBatch build_multiview(const Tensor& context, std::span<const int> labels);

/// Supervised contrastive loss summed over all 2N anchors, with the
/// denominator evaluated as a log-sum-exp.
Tensor scl_loss(const MultiviewBatch& batch, double tau, SclVariant variant, bool normalize = true);

/// Same loss on an explicit [2N×d] view matrix whose rows i and i+N are
/// partners. Used directly when the second view is supplied by the caller.
Tensor scl_loss_rows(const Tensor& views, std::span<const int> labels, std::size_t live, double tau,
                     SclVariant variant, bool normalize = true);

struct ClassifierHead {
  Tensor weight;  // [d×C]
  Tensor bias;    // [C]

  static ClassifierHead init(std::size_t dim, std::size_t classes, Rng& rng);
  std::size_t classes() const { return bias.size(); }
  void collect(const std::string& prefix, ParamRefs& out);
};

struct Classification {
  Tensor probabilities;          // [N×C]
  std::vector<int> predictions;  // argmax, lowest index on ties
};

Classification classify(const Tensor& context, const ClassifierHead& head);

/// Mean negative log-probability of the gold class.
Tensor ce_loss(const Tensor& probabilities, std::span<const int> labels, LossDiagnostics* diag = nullptr);

/// One (u_t, u_{t+1}) training pair for the generation objective.
struct GenerationPair {
  Tensor source_states;              // encoder states of u_t
  std::vector<bool> source_is_pad;
  std::vector<int> target;           // framed token ids of u_{t+1}
};

/// Token negative log-likelihood summed over each target (pad positions
/// excluded) and averaged over pairs. An empty list yields 0.
Tensor gen_loss(std::span<const GenerationPair> pairs, const SeqModelParams& model,
                LossDiagnostics* diag = nullptr);

/// (1-α-β)·ce + α·scl + β·gen.
Tensor total_loss(const Tensor& ce, const Tensor& scl, const Tensor& gen, const LossWeights& w);
/// Weighted sum with explicit coefficients. A component with weight 0 is not
/// added at all and may be left undefined.
Tensor total_loss(const Tensor& ce, const Tensor& scl, const Tensor& gen, const ComponentWeights& w);

}  // namespace erc
