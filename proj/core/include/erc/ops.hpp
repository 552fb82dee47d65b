#pragma once

#include <span>
#include <vector>

#include "erc/tensor.hpp"

/// Differentiable tensor operations. Rank-1 tensors of length n act as a
/// single row wherever a rank-2 operand is expected.
namespace erc::ops {

// Elementwise arithmetic on equal shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);

/// x[m×n] + bias[n] broadcast over rows.
Tensor add_row(const Tensor& x, const Tensor& bias);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor exp(const Tensor& a);
/// Natural log; entries must be positive.
Tensor log(const Tensor& a);
/// max(a, floor) with zero gradient where the floor is active.
Tensor clamp_min(const Tensor& a, double floor);
/// tanh approximation of GELU.
Tensor gelu(const Tensor& a);

/// Row-wise softmax with max subtraction. Entries may be -inf (masked) as
/// long as every row keeps one finite entry; NaN or +inf raise NumericError.
Tensor softmax_rows(const Tensor& x);
Tensor log_softmax_rows(const Tensor& x);
/// Row-wise log-sum-exp, returns [m]. Same masking rules as softmax_rows.
Tensor logsumexp_rows(const Tensor& x);

/// Row-wise layer normalization with gain and shift of length n.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps = 1e-5);

/// Row-wise division by the L2 norm, floored at eps.
Tensor l2_normalize_rows(const Tensor& x, double eps = 1e-12);

/// Rows of `table` selected by `ids`.
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);

/// Column-wise maximum over rows, returns [n]. On ties the gradient goes to
/// the lowest-index maximal row.
Tensor max_pool_rows(const Tensor& x);

Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);

/// out[i] = x[i, index[i]], returns [m].
Tensor pick(const Tensor& x, std::span<const int> index);

/// Value-identical copy with no gradient path back to `x`.
Tensor detach(const Tensor& x);

}  // namespace erc::ops
