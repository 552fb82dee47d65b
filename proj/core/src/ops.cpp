#include "erc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "erc/errors.hpp"

namespace erc::ops {

namespace {

using detail::Node;

struct Dims {
  std::size_t rows;
  std::size_t cols;
};

/// Views rank-1 tensors as a single row.
Dims dims2(const Tensor& t, const char* op) {
  const auto& s = t.shape();
  if (s.size() == 2) return {s[0], s[1]};
  if (s.size() == 1) return {1, s[0]};
  throw DimensionError(std::string(op) + ": expected a rank-1 or rank-2 tensor, got " +
                       shape_str(s));
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void check_softmax_input(const Tensor& x, Dims d, const char* op) {
  const auto v = x.data();
  for (std::size_t r = 0; r < d.rows; ++r) {
    bool finite = false;
    for (std::size_t c = 0; c < d.cols; ++c) {
      const double e = v[r * d.cols + c];
      if (std::isnan(e) || e == std::numeric_limits<double>::infinity()) {
        throw NumericError(std::string(op) + ": non-finite input at row " + std::to_string(r));
      }
      finite = finite || std::isfinite(e);
    }
    if (!finite) throw NumericError(std::string(op) + ": row " + std::to_string(r) + " is fully masked");
  }
}

double row_max(const double* row, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n; ++c) m = std::max(m, row[c]);
  return m;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b},
                         [](const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (auto* dst : in) {
                             if (!dst) continue;
                             for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
                           }
                         });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b},
                         [](const Node&, std::span<const double> g, std::span<double* const> in) {
                           if (in[0])
                             for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i];
                           if (in[1])
                             for (std::size_t i = 0; i < g.size(); ++i) in[1][i] -= g[i];
                         });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return Tensor::from_op(
      a.shape(), std::move(out), {a, b},
      [a, b](const Node&, std::span<const double> g, std::span<double* const> in) {
        if (in[0])
          for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] * b[i];
        if (in[1])
          for (std::size_t i = 0; i < g.size(); ++i) in[1][i] += g[i] * a[i];
      });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * c;
  return Tensor::from_op(a.shape(), std::move(out), {a},
                         [c](const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] * c;
                         });
}

Tensor add_scalar(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + c;
  return Tensor::from_op(a.shape(), std::move(out), {a},
                         [](const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i];
                         });
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
  const auto d = dims2(x, "add_row");
  if (bias.rank() != 1 || bias.size() != d.cols) {
    throw DimensionError("add_row: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(x.shape()));
  }
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < d.rows; ++r)
    for (std::size_t c = 0; c < d.cols; ++c) out[r * d.cols + c] = x[r * d.cols + c] + bias[c];
  return Tensor::from_op(x.shape(), std::move(out), {x, bias},
                         [d](const Node&, std::span<const double> g, std::span<double* const> in) {
                           if (in[0])
                             for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i];
                           if (in[1])
                             for (std::size_t r = 0; r < d.rows; ++r)
                               for (std::size_t c = 0; c < d.cols; ++c)
                                 in[1][c] += g[r * d.cols + c];
                         });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw DimensionError("matmul: cannot multiply " + shape_str(a.shape()) + " by " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return Tensor::from_op(
      {m, n}, std::move(out), {a, b},
      [a, b, m, k, n](const Node&, std::span<const double> g, std::span<double* const> in) {
        const auto av = a.data();
        const auto bv = b.data();
        if (in[0]) {
          // dA = G · Bᵀ
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double s = 0.0;
              const double* grow = g.data() + i * n;
              const double* brow = bv.data() + p * n;
              for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
              in[0][i * k + p] += s;
            }
        }
        if (in[1]) {
          // dB = Aᵀ · G
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = av[i * k + p];
              if (aip == 0.0) continue;
              const double* grow = g.data() + i * n;
              double* drow = in[1] + p * n;
              for (std::size_t j = 0; j < n; ++j) drow[j] += aip * grow[j];
            }
        }
      });
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw DimensionError("transpose: expected rank 2, got " + shape_str(a.shape()));
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return Tensor::from_op({n, m}, std::move(out), {a},
                         [m, n](const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < n; ++j) in[0][i * n + j] += g[j * m + i];
                         });
}


Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return Tensor::from_op({}, {s}, {a},
                         [](const Node& self, std::span<const double> g, std::span<double* const> in) {
                           const auto n = self.inputs[0]->value.size();
                           for (std::size_t i = 0; i < n; ++i) in[0][i] += g[0];
                         });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor exp(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a[i]);
  return Tensor::from_op(a.shape(), std::move(out), {a},
                         [](const Node& self, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] * self.value[i];
                         });
}

Tensor log(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(a[i] > 0.0)) throw NumericError("log: non-positive input " + std::to_string(a[i]));
    out[i] = std::log(a[i]);
  }
  return Tensor::from_op(a.shape(), std::move(out), {a},
                         [a](const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] / a[i];
                         });
}

Tensor clamp_min(const Tensor& a, double floor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a[i], floor);
  return Tensor::from_op(a.shape(), std::move(out), {a},
                         [a, floor](const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t i = 0; i < g.size(); ++i)
                             if (a[i] >= floor) in[0][i] += g[i];
                         });
}

Tensor gelu(const Tensor& a) {
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double c = 0.044715;
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = a[i];
    out[i] = 0.5 * x * (1.0 + std::tanh(k * (x + c * x * x * x)));
  }
  return Tensor::from_op(a.shape(), std::move(out), {a},
                         [a](const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             const double x = a[i];
                             const double t = std::tanh(k * (x + c * x * x * x));
                             const double dt = (1.0 - t * t) * k * (1.0 + 3.0 * c * x * x);
                             in[0][i] += g[i] * (0.5 * (1.0 + t) + 0.5 * x * dt);
                           }
                         });
}

Tensor softmax_rows(const Tensor& x) {
  const auto d = dims2(x, "softmax_rows");
  check_softmax_input(x, d, "softmax_rows");
  std::vector<double> out(x.size());
  const auto v = x.data();
  for (std::size_t r = 0; r < d.rows; ++r) {
    const double* row = v.data() + r * d.cols;
    double* o = out.data() + r * d.cols;
    const double m = row_max(row, d.cols);
    double z = 0.0;
    for (std::size_t c = 0; c < d.cols; ++c) z += (o[c] = std::exp(row[c] - m));
    for (std::size_t c = 0; c < d.cols; ++c) o[c] /= z;
  }
  return Tensor::from_op(x.shape(), std::move(out), {x},
                         [d](const Node& self, std::span<const double> g, std::span<double* const> in) {
                           const auto& y = self.value;
                           for (std::size_t r = 0; r < d.rows; ++r) {
                             const std::size_t o = r * d.cols;
                             double dot = 0.0;
                             for (std::size_t c = 0; c < d.cols; ++c) dot += g[o + c] * y[o + c];
                             for (std::size_t c = 0; c < d.cols; ++c)
                               in[0][o + c] += y[o + c] * (g[o + c] - dot);
                           }
                         });
}

Tensor log_softmax_rows(const Tensor& x) {
  const auto d = dims2(x, "log_softmax_rows");
  check_softmax_input(x, d, "log_softmax_rows");
  std::vector<double> out(x.size());
  const auto v = x.data();
  for (std::size_t r = 0; r < d.rows; ++r) {
    const double* row = v.data() + r * d.cols;
    const double m = row_max(row, d.cols);
    double z = 0.0;
    for (std::size_t c = 0; c < d.cols; ++c) z += std::exp(row[c] - m);
    const double lse = m + std::log(z);
    for (std::size_t c = 0; c < d.cols; ++c) out[r * d.cols + c] = row[c] - lse;
  }
  return Tensor::from_op(x.shape(), std::move(out), {x},
                         [d](const Node& self, std::span<const double> g, std::span<double* const> in) {
                           const auto& y = self.value;
                           for (std::size_t r = 0; r < d.rows; ++r) {
                             const std::size_t o = r * d.cols;
                             double gs = 0.0;
                             for (std::size_t c = 0; c < d.cols; ++c) gs += g[o + c];
                             for (std::size_t c = 0; c < d.cols; ++c)
                               in[0][o + c] += g[o + c] - std::exp(y[o + c]) * gs;
                           }
                         });
}

Tensor logsumexp_rows(const Tensor& x) {
  const auto d = dims2(x, "logsumexp_rows");
  check_softmax_input(x, d, "logsumexp_rows");
  std::vector<double> out(d.rows);
  const auto v = x.data();
  for (std::size_t r = 0; r < d.rows; ++r) {
    const double* row = v.data() + r * d.cols;
    const double m = row_max(row, d.cols);
    double z = 0.0;
    for (std::size_t c = 0; c < d.cols; ++c) z += std::exp(row[c] - m);
    out[r] = m + std::log(z);
  }
  return Tensor::from_op({d.rows}, std::move(out), {x},
                         [x, d](const Node& self, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t r = 0; r < d.rows; ++r)
                             for (std::size_t c = 0; c < d.cols; ++c) {
                               const std::size_t i = r * d.cols + c;
                               in[0][i] += g[r] * std::exp(x[i] - self.value[r]);
                             }
                         });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  const auto d = dims2(x, "layer_norm");
  if (gain.rank() != 1 || gain.size() != d.cols || shift.shape() != gain.shape()) {
    throw DimensionError("layer_norm: gain " + shape_str(gain.shape()) + " / shift " +
                         shape_str(shift.shape()) + " do not match " + shape_str(x.shape()));
  }
  const std::size_t n = d.cols;
  std::vector<double> out(x.size());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(d.rows);
  for (std::size_t r = 0; r < d.rows; ++r) {
    const std::size_t o = r * n;
    double mu = 0.0;
    for (std::size_t c = 0; c < n; ++c) mu += x[o + c];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t c = 0; c < n; ++c) var += (x[o + c] - mu) * (x[o + c] - mu);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      xhat[o + c] = (x[o + c] - mu) * inv_std[r];
      out[o + c] = xhat[o + c] * gain[c] + shift[c];
    }
  }
  return Tensor::from_op(
      x.shape(), std::move(out), {x, gain, shift},
      [d, n, gain, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          const Node&, std::span<const double> g, std::span<double* const> in) {
        const double nn = static_cast<double>(n);
        for (std::size_t r = 0; r < d.rows; ++r) {
          const std::size_t o = r * n;
          if (in[0]) {
            double sum_gy = 0.0, sum_gy_xhat = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
              const double gy = g[o + c] * gain[c];
              sum_gy += gy;
              sum_gy_xhat += gy * xhat[o + c];
            }
            for (std::size_t c = 0; c < n; ++c) {
              const double gy = g[o + c] * gain[c];
              in[0][o + c] += inv_std[r] / nn * (nn * gy - sum_gy - xhat[o + c] * sum_gy_xhat);
            }
          }
          if (in[1])
            for (std::size_t c = 0; c < n; ++c) in[1][c] += g[o + c] * xhat[o + c];
          if (in[2])
            for (std::size_t c = 0; c < n; ++c) in[2][c] += g[o + c];
        }
      });
}

Tensor l2_normalize_rows(const Tensor& x, double eps) {
  const auto d = dims2(x, "l2_normalize_rows");
  std::vector<double> out(x.size());
  std::vector<double> norms(d.rows);
  for (std::size_t r = 0; r < d.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < d.cols; ++c) s += x[r * d.cols + c] * x[r * d.cols + c];
    norms[r] = std::max(std::sqrt(s), eps);
    for (std::size_t c = 0; c < d.cols; ++c) out[r * d.cols + c] = x[r * d.cols + c] / norms[r];
  }
  return Tensor::from_op(
      x.shape(), std::move(out), {x},
      [d, eps, norms = std::move(norms)](const Node& self, std::span<const double> g,
                                         std::span<double* const> in) {
        const auto& y = self.value;
        for (std::size_t r = 0; r < d.rows; ++r) {
          const std::size_t o = r * d.cols;
          if (norms[r] <= eps) {
            for (std::size_t c = 0; c < d.cols; ++c) in[0][o + c] += g[o + c] / norms[r];
            continue;
          }
          double dot = 0.0;
          for (std::size_t c = 0; c < d.cols; ++c) dot += g[o + c] * y[o + c];
          for (std::size_t c = 0; c < d.cols; ++c)
            in[0][o + c] += (g[o + c] - y[o + c] * dot) / norms[r];
        }
      });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  if (table.rank() != 2) {
    throw DimensionError("embedding_lookup: table must be rank 2, got " + shape_str(table.shape()));
  }
  const std::size_t vocab = table.shape()[0], dim = table.shape()[1];
  std::vector<double> out(ids.size() * dim);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= vocab) {
      throw IndexError("embedding_lookup: id " + std::to_string(ids[r]) + " outside vocabulary of " +
                       std::to_string(vocab));
    }
    const auto row = table.data().subspan(static_cast<std::size_t>(ids[r]) * dim, dim);
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return Tensor::from_op({ids.size(), dim}, std::move(out), {table},
                         [dim, idv = std::move(idv)](const Node&, std::span<const double> g,
                                                     std::span<double* const> in) {
                           for (std::size_t r = 0; r < idv.size(); ++r) {
                             double* dst = in[0] + static_cast<std::size_t>(idv[r]) * dim;
                             for (std::size_t c = 0; c < dim; ++c) dst[c] += g[r * dim + c];
                           }
                         });
}

Tensor max_pool_rows(const Tensor& x) {
  const auto d = dims2(x, "max_pool_rows");
  if (d.rows == 0 || d.cols == 0) {
    throw DimensionError("max_pool_rows: empty input " + shape_str(x.shape()));
  }
  std::vector<double> out(d.cols);
  std::vector<std::size_t> argmax(d.cols, 0);
  for (std::size_t c = 0; c < d.cols; ++c) {
    out[c] = x[c];
    for (std::size_t r = 1; r < d.rows; ++r) {
      if (x[r * d.cols + c] > out[c]) {
        out[c] = x[r * d.cols + c];
        argmax[c] = r;
      }
    }
  }
  return Tensor::from_op({d.cols}, std::move(out), {x},
                         [d, argmax = std::move(argmax)](const Node&, std::span<const double> g,
                                                         std::span<double* const> in) {
                           for (std::size_t c = 0; c < d.cols; ++c)
                             in[0][argmax[c] * d.cols + c] += g[c];
                         });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t cols = dims2(parts[0], "concat_rows").cols;
  std::size_t rows = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    const auto d = dims2(p, "concat_rows");
    if (d.cols != cols) {
      throw DimensionError("concat_rows: column mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    offsets.push_back(rows * cols);
    rows += d.rows;
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return Tensor::from_op({rows, cols}, std::move(out), {parts.begin(), parts.end()},
                         [offsets = std::move(offsets)](const Node& self, std::span<const double> g,
                                                        std::span<double* const> in) {
                           for (std::size_t k = 0; k < in.size(); ++k) {
                             if (!in[k]) continue;
                             const auto n = self.inputs[k]->value.size();
                             for (std::size_t i = 0; i < n; ++i) in[k][i] += g[offsets[k] + i];
                           }
                         });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t rows = dims2(parts[0], "concat_cols").rows;
  std::size_t cols = 0;
  std::vector<std::size_t> offsets, widths;
  for (const auto& p : parts) {
    const auto d = dims2(p, "concat_cols");
    if (d.rows != rows) {
      throw DimensionError("concat_cols: row mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    offsets.push_back(cols);
    widths.push_back(d.cols);
    cols += d.cols;
  }
  std::vector<double> out(rows * cols);
  for (std::size_t k = 0; k < parts.size(); ++k)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < widths[k]; ++c)
        out[r * cols + offsets[k] + c] = parts[k][r * widths[k] + c];
  return Tensor::from_op({rows, cols}, std::move(out), {parts.begin(), parts.end()},
                         [rows, cols, offsets = std::move(offsets), widths = std::move(widths)](
                             const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t k = 0; k < in.size(); ++k) {
                             if (!in[k]) continue;
                             for (std::size_t r = 0; r < rows; ++r)
                               for (std::size_t c = 0; c < widths[k]; ++c)
                                 in[k][r * widths[k] + c] += g[r * cols + offsets[k] + c];
                           }
                         });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  const auto d = dims2(x, "slice_rows");
  if (begin > end || end > d.rows) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for " + shape_str(x.shape()));
  }
  const auto first = x.data().begin() + static_cast<std::ptrdiff_t>(begin * d.cols);
  std::vector<double> out(first, first + static_cast<std::ptrdiff_t>((end - begin) * d.cols));
  return Tensor::from_op({end - begin, d.cols}, std::move(out), {x},
                         [off = begin * d.cols](const Node&, std::span<const double> g,
                                                std::span<double* const> in) {
                           for (std::size_t i = 0; i < g.size(); ++i) in[0][off + i] += g[i];
                         });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  const auto d = dims2(x, "slice_cols");
  if (begin > end || end > d.cols) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for " + shape_str(x.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> out(d.rows * w);
  for (std::size_t r = 0; r < d.rows; ++r)
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] = x[r * d.cols + begin + c];
  return Tensor::from_op({d.rows, w}, std::move(out), {x},
                         [d, begin, w](const Node&, std::span<const double> g, std::span<double* const> in) {
                           for (std::size_t r = 0; r < d.rows; ++r)
                             for (std::size_t c = 0; c < w; ++c) in[0][r * d.cols + begin + c] += g[r * w + c];
                         });
}

Tensor pick(const Tensor& x, std::span<const int> index) {
  const auto d = dims2(x, "pick");
  if (index.size() != d.rows) {
    throw DimensionError("pick: " + std::to_string(index.size()) + " indices for " +
                         shape_str(x.shape()));
  }
  std::vector<double> out(d.rows);
  for (std::size_t r = 0; r < d.rows; ++r) {
    if (index[r] < 0 || static_cast<std::size_t>(index[r]) >= d.cols) {
      throw IndexError("pick: index " + std::to_string(index[r]) + " outside " + std::to_string(d.cols) +
                       " columns");
    }
    out[r] = x[r * d.cols + static_cast<std::size_t>(index[r])];
  }
  std::vector<int> idx(index.begin(), index.end());
  return Tensor::from_op({d.rows}, std::move(out), {x},
                         [d, idx = std::move(idx)](const Node&, std::span<const double> g,
                                                   std::span<double* const> in) {
                           for (std::size_t r = 0; r < d.rows; ++r)
                             in[0][r * d.cols + static_cast<std::size_t>(idx[r])] += g[r];
                         });
}

Tensor detach(const Tensor& x) { return Tensor::constant(x.shape(), x.values()); }

}  // namespace erc::ops
