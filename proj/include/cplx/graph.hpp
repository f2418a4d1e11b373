#pragma once

#include "cplx/tensor.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cplx {

/// A named leaf tensor that owns a gradient accumulator. The accumulator is allocated
/// on first use, so models built only for counting never pay for it.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  const std::string& name() const { return name_; }
  const Tensor& value() const { return value_; }
  Tensor& value() { return value_; }
  const Tensor& grad() const {
    if (grad_.shape() != value_.shape()) grad_ = Tensor(value_.shape());
    return grad_;
  }
  Tensor& grad() { return const_cast<Tensor&>(std::as_const(*this).grad()); }
  void zero_grad() { grad().fill(0.0); }
  std::size_t size() const { return value_.size(); }

 private:
  std::string name_;
  Tensor value_;
  mutable Tensor grad_;
};

class Graph;

/// Handle to a node recorded on a Graph.
class Var {
 public:
  Var() = default;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  Graph& graph() const;
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t dim(std::size_t axis) const { return shape().at(axis); }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Complex-valued node pair: real part and imaginary part tracked separately.
struct CVar {
  Var re;
  Var im;
  const Shape& shape() const { return re.shape(); }
  ComplexPair value() const { return {re.value(), im.value()}; }
};

class BackwardContext;
using BackwardFn = std::function<void(BackwardContext&)>;

/// Append-only tape. Node order is topological by construction.
class Graph {
 public:
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Tensor value);
  CVar constant(ComplexPair value);
  /// Leaf bound to a parameter. The value is referenced, not copied.
  Var param(Parameter& p);

  /// Record an op result. The backward closure runs only when some input needs a gradient.
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  /// Reverse sweep from a scalar loss. Parameter gradients are accumulated (not overwritten).
  void backward(const Var& loss);

  const Tensor& value(std::size_t id) const;
  const Tensor& grad(const Var& v) const;
  bool requires_grad(const Var& v) const { return nodes_.at(v.id()).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  friend class BackwardContext;
  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;

    const Tensor& value() const { return ref ? *ref : owned; }
  };

  void check_owner(const Var& v) const;

  std::deque<Node> nodes_;  // deque: references to earlier nodes survive appends
  bool grad_enabled_;
};

class BackwardContext {
 public:
  BackwardContext(Graph& g, std::size_t node) : g_(g), node_(node) {}

  const Tensor& grad_out() const { return g_.nodes_[node_].grad; }
  const Tensor& output() const { return g_.nodes_[node_].value(); }
  const Tensor& input(std::size_t i) const;
  bool needs(std::size_t i) const;
  /// Gradient accumulator of input i, zero-initialised on first use.
  Tensor& grad_in(std::size_t i);

 private:
  Graph& g_;
  std::size_t node_;
};

}  // namespace cplx
