// SPDX-License-Identifier: Apache-2.0
//
// Define-by-run reverse-mode tape. Nodes are appended in execution order,
// which is already a topological order, so backward is a single reverse
// sweep. Each node owns its output tensor; gradient buffers are allocated
// lazily when a node first receives gradient. Node storage is a deque so
// references returned by value()/grad() stay valid as the graph grows.
#pragma once

#include <deque>
#include <functional>
#include <stdexcept>
#include <utility>

#include "mirl/tensor.hpp"

namespace mirl {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var self)>;

  Var leaf(Tensor<T> value, bool requires_grad = false) {
    return emplace(std::move(value), requires_grad, nullptr);
  }

  Var constant(Tensor<T> value) { return leaf(std::move(value), false); }

  Var emplace(Tensor<T> value, bool requires_grad, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), Tensor<T>{}, std::move(backward), requires_grad, false});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Tensor<T>& value(Var v) const { return node(v).value; }

  bool requires_grad(Var v) const { return node(v).requires_grad; }

  // Accumulation buffer, zero-initialised on first touch. Only meaningful
  // for requires_grad nodes.
  Tensor<T>& grad_accum(Var v) {
    Node& n = node(v);
    if (!n.requires_grad) throw std::logic_error("gradient requested for a node that does not require it");
    if (!n.grad_live) {
      n.grad = Tensor<T>::zeros(n.value.shape);
      n.grad_live = true;
    }
    return n.grad;
  }

  // Post-backward read; zero tensor if the node never received gradient.
  const Tensor<T>& grad(Var v) {
    if (!backward_done_) throw std::logic_error("grad() before backward()");
    return grad_accum(v);
  }

  void backward(Var loss) {
    if (backward_done_) throw std::logic_error("backward() called twice on the same graph; rebuild the forward pass first");
    const Node& ln = node(loss);
    require(ln.value.size() == 1, "backward() needs a scalar loss, got " + shape_str(ln.value.shape));
    if (!ln.requires_grad) throw std::logic_error("loss does not depend on any requires_grad tensor");
    backward_done_ = true;
    grad_accum(loss).values[0] = T(1);
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.requires_grad || !n.grad_live || !n.backward) continue;
      n.backward(*this, Var{i});
    }
  }

  bool backward_done() const { return backward_done_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool grad_live = false;
  };

  Node& node(Var v) {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw std::out_of_range("invalid graph variable");
    return nodes_[static_cast<std::size_t>(v.id)];
  }
  const Node& node(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw std::out_of_range("invalid graph variable");
    return nodes_[static_cast<std::size_t>(v.id)];
  }

  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

using GraphF = Graph<float>;
using GraphD = Graph<double>;

}  // namespace mirl
