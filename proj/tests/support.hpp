#pragma once

#include "cplx/layers.hpp"
#include "cplx/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace cplx::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = u(rng);
  return t;
}

inline ComplexPair random_complex(const Shape& shape, std::mt19937_64& rng) {
  return {random_tensor(shape, rng), random_tensor(shape, rng)};
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

/// Scalar probe of an output: sum(y * r) for a fixed random r, so every output
/// element contributes with its own weight.
struct Probe {
  std::vector<Tensor> weights;
  std::mt19937_64 rng;

  explicit Probe(std::uint64_t seed) : rng(seed) {}

  Var operator()(const Var& y) {
    weights.push_back(random_tensor(y.shape(), rng));
    return sum(mul_broadcast(y, weights.back()));
  }
  Var operator()(const CVar& y) { return add((*this)(y.re), (*this)(y.im)); }
};

/// Worst per-parameter relative error ||analytic - numeric|| / max(||analytic||, ||numeric||)
/// between backprop gradients and central differences.
/// `loss` must rebuild the whole computation on the graph it is given.
inline double gradcheck(const std::vector<Parameter*>& params,
                        const std::function<Var(Graph&)>& loss, double h = 1e-6) {
  for (auto* p : params) p->zero_grad();
  {
    Graph g;
    Var l = loss(g);
    g.backward(l);
  }
  auto eval = [&] {
    Graph g(false);
    return loss(g).value().item();
  };
  double worst = 0.0;
  for (auto* p : params) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < p->size(); ++i) {
      double& w = p->value()[i];
      const double saved = w;
      w = saved + h;
      const double up = eval();
      w = saved - h;
      const double down = eval();
      w = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad()[i];
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
    worst = std::max(worst, std::sqrt(diff2) / denom);
  }
  return worst;
}

}  // namespace cplx::testing
