#include "cplx/graph.hpp"

#include <stdexcept>

namespace cplx {

Parameter::Parameter(std::string name, Tensor value)
    : name_(std::move(name)), value_(std::move(value)) {}

Graph& Var::graph() const {
  if (!graph_) throw std::logic_error("Var: not bound to a graph");
  return *graph_;
}

const Tensor& Var::value() const { return graph().value(id_); }

Var Graph::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

CVar Graph::constant(ComplexPair value) {
  Var re = constant(std::move(value.re));
  Var im = constant(std::move(value.im));
  return {re, im};
}

Var Graph::param(Parameter& p) {
  Node n;
  n.ref = &p.value();
  n.param = &p;
  n.requires_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  if (grad_enabled_) {
    n.inputs.reserve(inputs.size());
    for (const auto& v : inputs) {
      check_owner(v);
      n.inputs.push_back(v.id());
      n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

void Graph::check_owner(const Var& v) const {
  if (!v.valid() || &v.graph() != this || v.id() >= nodes_.size()) {
    throw std::invalid_argument("Graph: variable does not belong to this graph");
  }
}

const Tensor& Graph::value(std::size_t id) const { return nodes_.at(id).value(); }

const Tensor& Graph::grad(const Var& v) const {
  check_owner(v);
  return nodes_[v.id()].grad;
}

void Graph::backward(const Var& loss) {
  if (!loss.valid() || &loss.graph() != this || loss.id() >= nodes_.size()) {
    throw std::invalid_argument("backward: loss is not a node of this graph");
  }
  Node& root = nodes_[loss.id()];
  if (root.value().size() != 1) {
    throw DimensionError("backward: loss must be a scalar, got shape " +
                         shape_str(root.value().shape()));
  }
  if (!grad_enabled_) throw std::logic_error("backward: graph was built without gradients");
  root.grad = Tensor(root.value().shape(), 1.0);

  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.param) {
      Tensor& acc = n.param->grad();
      if (acc.shape() != n.grad.shape()) acc = Tensor(n.grad.shape());
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += n.grad[i];
      continue;
    }
    if (n.backward) {
      BackwardContext ctx(*this, id);
      n.backward(ctx);
    }
  }
}

const Tensor& BackwardContext::input(std::size_t i) const {
  return g_.nodes_[g_.nodes_[node_].inputs.at(i)].value();
}

bool BackwardContext::needs(std::size_t i) const {
  return g_.nodes_[g_.nodes_[node_].inputs.at(i)].requires_grad;
}

Tensor& BackwardContext::grad_in(std::size_t i) {
  auto& in = g_.nodes_[g_.nodes_[node_].inputs.at(i)];
  if (in.grad.empty()) in.grad = Tensor(in.value().shape());
  return in.grad;
}

}  // namespace cplx
