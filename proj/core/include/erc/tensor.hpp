#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace erc {

using Shape = std::vector<std::size_t>;
using NodeId = std::uint64_t;

std::string shape_str(const Shape& shape);
std::size_t shape_size(const Shape& shape);

class Tensor;

namespace detail {

struct Node;

/// Accumulates the gradient of one node into the gradient buffers of its
/// inputs. `input_grads[i]` is null when input i does not take gradient.
using BackwardFn = std::function<void(const Node& self, std::span<const double> grad,
                                      std::span<double* const> input_grads)>;

struct Node {
  NodeId seq = 0;
  Shape shape;
  std::vector<double> value;
  bool requires_grad = false;
  std::vector<std::shared_ptr<const Node>> inputs;
  BackwardFn backward;
};

}  // namespace detail

/// Dense row-major float64 array of rank <= 3 that takes part in a
/// define-by-run differentiation graph. Tensors are immutable handles;
/// copying one shares the underlying node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> data);
  static Tensor parameter(Shape shape, std::vector<double> data);
  static Tensor scalar(double value);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);

  /// Records the result of a differentiable operation. Inputs that do not
  /// require gradient are dropped from the graph; if none does, the result
  /// is a constant and `backward` is discarded.
  static Tensor from_op(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                        detail::BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return node_->value; }
  const std::vector<double>& values() const { return node_->value; }
  double item() const;
  double operator[](std::size_t i) const { return node_->value[i]; }
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const { return node_ && node_->requires_grad; }
  /// Absent for constants and detached tensors.
  std::optional<NodeId> node_id() const;

  const std::shared_ptr<const detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const detail::Node> node_;
};

/// Gradients of a scalar with respect to every gradient-taking leaf reached
/// during the backward pass, keyed by node id.
class Gradients {
 public:
  /// Gradient of `t`, or a zero tensor of its shape when `t` received none
  /// (constants, detached copies, parameters the loss does not touch).
  Tensor of(const Tensor& t) const;
  const std::vector<double>* find(NodeId id) const;
  bool contains(NodeId id) const { return grads_.count(id) != 0; }
  std::size_t size() const { return grads_.size(); }

  void insert(NodeId id, std::vector<double> grad) { grads_[id] = std::move(grad); }

 private:
  std::unordered_map<NodeId, std::vector<double>> grads_;
};

/// Replays the recorded graph in reverse creation order so that every node
/// is visited after all of its consumers. Only leaves (parameters) are kept
/// in the returned map.
Gradients backward(const Tensor& loss);

}  // namespace erc
