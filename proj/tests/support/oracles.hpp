#pragma once

// Reference implementations used by the tests. None of them calls into the
// library's metric or loss code; they recompute everything by direct
// counting or plain double arithmetic.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "erc/layers.hpp"
#include "erc/objectives.hpp"
#include "erc/tensor.hpp"

namespace erc::testing {

using Matrix = std::vector<std::vector<double>>;

// ---- finite differences -------------------------------------------------

inline constexpr double kFdStep = 1e-5;
inline constexpr double kGradTolerance = 1e-4;
// Denominator floor of the relative error, per unit of max(1, |L|). Central
// differences of a loss of size |L| carry rounding noise near 1e-16·|L|/h, so
// gradients that are zero in exact arithmetic compare by absolute difference
// against this floor.
inline constexpr double kRelFloor = 1e-4;

double relative_error(double analytic, double numeric, double loss_magnitude = 1.0);

struct GradCheck {
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  // Worst coordinate, for failure messages.
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool ok() const { return max_rel_error <= kGradTolerance; }
};

/// Compares backward() against central differences on up to `max_coords`
/// random coordinates of every tensor in `params`. `loss` must rebuild the
/// graph from the current contents of the pointed-to tensors.
GradCheck check_gradients(const std::function<Tensor()>& loss, const std::vector<Tensor*>& params, Rng& rng,
                          std::size_t max_coords = 6);

/// Same for all parameters of a model, grouped by name prefix.
GradCheck check_gradients(const std::function<Tensor()>& loss, const ParamRefs& params, Rng& rng,
                          std::size_t max_coords_per_tensor = 2);

/// Σ w ⊙ x with fixed random weights: a scalar reduction that exercises
/// every output entry with a distinct coefficient.
Tensor random_projection(const Tensor& x, std::uint64_t seed);

Tensor random_parameter(const Shape& shape, Rng& rng, double lo = -2.0, double hi = 2.0);

/// Replaces every parameter with uniform(-scale, scale) values (layer-norm
/// gains around 1) so gradients are far from zero in finite-difference checks.
void randomize_parameters(const ParamRefs& params, Rng& rng, double scale = 0.5);

// ---- metrics ------------------------------------------------------------

double oracle_weighted_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred, int num_classes);
std::optional<double> oracle_micro_f1_excluding(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                                int excluded);

// ---- contrastive loss ---------------------------------------------------

/// Direct evaluation of the multiview contrastive loss: loops over anchors,
/// positives and candidates, with exp and log taken literally.
double oracle_scl(Matrix rows, const std::vector<int>& labels, std::size_t live, double tau, SclVariant variant,
                  bool normalize);

Matrix to_matrix(const Tensor& t);

}  // namespace erc::testing
