#include "cplx/tensor.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numeric>
#include <sstream>

namespace cplx {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw DimensionError(op, a.shape(), b.shape());
}

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a rank-2 operand, got " +
                         shape_str(a.shape()));
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

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

DimensionError::DimensionError(const std::string& what, const Shape& a, const Shape& b)
    : std::invalid_argument(what + ": shape mismatch " + shape_str(a) + " vs " +
                            shape_str(b)) {}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (auto e : shape_) {
    if (e == 0) throw DimensionError("Tensor: zero extent in shape " + shape_str(shape_));
  }
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto e : shape_) {
    if (e == 0) throw DimensionError("Tensor: zero extent in shape " + shape_str(shape_));
  }
  if (data_.size() != shape_numel(shape_)) {
    throw DimensionError("Tensor: data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw DimensionError("Tensor::from_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({m, n}, std::move(data));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw DimensionError("Tensor::item: not a scalar, shape " + shape_str(shape_));
  }
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw DimensionError("Tensor::reshaped", shape_, shape);
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::require_finite(const std::string& where) const {
  if (!all_finite()) throw NonFiniteError(where + ": non-finite value");
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

ComplexPair::ComplexPair(Tensor re_part, Tensor im_part)
    : re(std::move(re_part)), im(std::move(im_part)) {
  if (re.shape() != im.shape()) throw DimensionError("ComplexPair", re.shape(), im.shape());
}

ComplexPair ComplexPair::from_real(Tensor re_part) {
  Tensor zero(re_part.shape());
  return {std::move(re_part), std::move(zero)};
}

double activate(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::ReLU: return x > 0.0 ? x : 0.0;
    case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::ELU: return x > 0.0 ? x : std::expm1(x);
    case ActivationKind::Identity: return x;
  }
  return x;
}

double activate_grad(ActivationKind kind, double x, double y) {
  switch (kind) {
    case ActivationKind::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Sigmoid: return y * (1.0 - y);
    case ActivationKind::Tanh: return 1.0 - y * y;
    case ActivationKind::ELU: return x > 0.0 ? 1.0 : y + 1.0;
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

ActivationKind parse_activation(const std::string& name) {
  if (name == "relu") return ActivationKind::ReLU;
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "elu") return ActivationKind::ELU;
  if (name == "identity") return ActivationKind::Identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::ELU: return "elu";
    case ActivationKind::Identity: return "identity";
  }
  return "?";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  if (a.dim(1) != b.dim(0)) throw DimensionError("matmul", a.shape(), b.shape());
  Tensor out({a.dim(0), b.dim(1)});
  MutMap(out.ptr(), a.dim(0), b.dim(1)).noalias() =
      ConstMap(a.ptr(), a.dim(0), a.dim(1)) * ConstMap(b.ptr(), b.dim(0), b.dim(1));
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix("matmul_tn", a);
  require_matrix("matmul_tn", b);
  if (a.dim(0) != b.dim(0)) throw DimensionError("matmul_tn", a.shape(), b.shape());
  Tensor out({a.dim(1), b.dim(1)});
  MutMap(out.ptr(), a.dim(1), b.dim(1)).noalias() =
      ConstMap(a.ptr(), a.dim(0), a.dim(1)).transpose() *
      ConstMap(b.ptr(), b.dim(0), b.dim(1));
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix("matmul_nt", a);
  require_matrix("matmul_nt", b);
  if (a.dim(1) != b.dim(1)) throw DimensionError("matmul_nt", a.shape(), b.shape());
  Tensor out({a.dim(0), b.dim(0)});
  MutMap(out.ptr(), a.dim(0), b.dim(0)).noalias() =
      ConstMap(a.ptr(), a.dim(0), a.dim(1)) *
      ConstMap(b.ptr(), b.dim(0), b.dim(1)).transpose();
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape("hadamard", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (auto& v : out.data()) v *= s;
  return out;
}

Tensor apply(ActivationKind kind, const Tensor& a) {
  Tensor out = a;
  for (auto& v : out.data()) v = activate(kind, v);
  return out;
}

ComplexPair complex_matmul(const ComplexPair& x, const ComplexPair& w) {
  return {sub(matmul(x.re, w.re), matmul(x.im, w.im)),
          add(matmul(x.re, w.im), matmul(x.im, w.re))};
}

ComplexPair split_activation(const ComplexPair& z, ActivationKind f) {
  return {apply(f, z.re), apply(f, z.im)};
}

ComplexPair complex_hadamard(const ComplexPair& a, const ComplexPair& b) {
  require_same_shape("complex_hadamard", a.re, b.re);
  ComplexPair out{Tensor(a.shape()), Tensor(a.shape())};
  for (std::size_t i = 0; i < a.re.size(); ++i) {
    out.re[i] = a.re[i] * b.re[i] - a.im[i] * b.im[i];
    out.im[i] = a.re[i] * b.im[i] + a.im[i] * b.re[i];
  }
  return out;
}

Tensor complex_magnitude(const ComplexPair& z, double eps) {
  if (eps < 0.0) throw std::invalid_argument("complex_magnitude: eps must be >= 0");
  Tensor out(z.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::sqrt(z.re[i] * z.re[i] + z.im[i] * z.im[i] + eps);
  }
  return out;
}

}  // namespace cplx
