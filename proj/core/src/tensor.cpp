#include "erc/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

#include "erc/errors.hpp"

namespace erc {

namespace {

std::atomic<NodeId> g_next_seq{1};

NodeId next_seq() { return g_next_seq.fetch_add(1, std::memory_order_relaxed); }

void check_shape(const Shape& shape, std::size_t n) {
  if (shape.size() > 3) {
    throw DimensionError("tensor rank must be <= 3, got shape " + shape_str(shape));
  }
  if (shape_size(shape) != n) {
    throw DimensionError("shape " + shape_str(shape) + " does not hold " + std::to_string(n) +
                         " values");
  }
}

}  // namespace

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor Tensor::constant(Shape shape, std::vector<double> data) {
  check_shape(shape, data.size());
  auto node = std::make_shared<detail::Node>();
  node->seq = next_seq();
  node->shape = std::move(shape);
  node->value = std::move(data);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
  check_shape(shape, data.size());
  auto node = std::make_shared<detail::Node>();
  node->seq = next_seq();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return constant({}, {value}); }

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = shape_size(shape);
  return constant(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::from_op(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                       detail::BackwardFn backward) {
  check_shape(shape, data.size());
  auto node = std::make_shared<detail::Node>();
  node->seq = next_seq();
  node->shape = std::move(shape);
  node->value = std::move(data);
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return t.requires_grad(); });
  if (any) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

const Shape& Tensor::shape() const {
  if (!node_) throw ContractError("use of an undefined tensor");
  return node_->shape;
}

std::size_t Tensor::rows() const {
  const auto& s = shape();
  if (s.size() != 2) throw DimensionError("rows() needs a rank-2 tensor, got " + shape_str(s));
  return s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = shape();
  if (s.size() != 2) throw DimensionError("cols() needs a rank-2 tensor, got " + shape_str(s));
  return s[1];
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

double Tensor::at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

std::optional<NodeId> Tensor::node_id() const {
  if (!requires_grad()) return std::nullopt;
  return node_->seq;
}

Tensor Gradients::of(const Tensor& t) const {
  if (auto id = t.node_id()) {
    if (auto it = grads_.find(*id); it != grads_.end()) {
      return Tensor::constant(t.shape(), it->second);
    }
  }
  return Tensor::zeros(t.shape());
}

const std::vector<double>* Gradients::find(NodeId id) const {
  auto it = grads_.find(id);
  return it == grads_.end() ? nullptr : &it->second;
}

Gradients backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  Gradients out;
  if (!loss.requires_grad()) return out;

  // Collect the gradient-carrying subgraph.
  std::vector<const detail::Node*> order;
  std::unordered_map<const detail::Node*, std::size_t> slot;
  std::vector<const detail::Node*> stack{loss.node().get()};
  slot.emplace(loss.node().get(), 0);
  order.push_back(loss.node().get());
  while (!stack.empty()) {
    const auto* n = stack.back();
    stack.pop_back();
    for (const auto& in : n->inputs) {
      if (!in->requires_grad) continue;
      if (slot.emplace(in.get(), order.size()).second) {
        order.push_back(in.get());
        stack.push_back(in.get());
      }
    }
  }

  // Creation order is a topological order: consumers always have larger seq.
  std::vector<std::size_t> idx(order.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return order[a]->seq > order[b]->seq; });

  std::vector<std::vector<double>> grads(order.size());
  grads[0].assign(1, 1.0);
  std::vector<double*> in_ptrs;
  for (auto i : idx) {
    const auto* n = order[i];
    if (grads[i].empty()) grads[i].assign(n->value.size(), 0.0);
    if (n->backward) {
      in_ptrs.assign(n->inputs.size(), nullptr);
      for (std::size_t k = 0; k < n->inputs.size(); ++k) {
        const auto* in = n->inputs[k].get();
        if (!in->requires_grad) continue;
        auto& g = grads[slot.at(in)];
        if (g.empty()) g.assign(in->value.size(), 0.0);
        in_ptrs[k] = g.data();
      }
      n->backward(*n, grads[i], in_ptrs);
    }
    out.insert(n->seq, std::move(grads[i]));
  }
  return out;
}

}  // namespace erc
