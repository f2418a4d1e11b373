#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cplx {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Raised when operand extents do not line up. The message names both shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
  DimensionError(const std::string& what, const Shape& a, const Shape& b);
};

/// Raised when a NaN or Inf reaches a place that must stay finite.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major array of 64-bit reals.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* ptr() { return data_.data(); }
  const double* ptr() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  double item() const;
  Tensor reshaped(Shape shape) const;
  bool all_finite() const;
  void require_finite(const std::string& where) const;
  void fill(double v);

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Complex array stored as two parallel real tensors of identical shape.
struct ComplexPair {
  Tensor re;
  Tensor im;

  ComplexPair() = default;
  ComplexPair(Tensor re_part, Tensor im_part);
  static ComplexPair from_real(Tensor re_part);

  const Shape& shape() const { return re.shape(); }
};

enum class ActivationKind { ReLU, Sigmoid, Tanh, ELU, Identity };

double activate(ActivationKind kind, double x);
/// Derivative expressed through input x and output y = f(x).
double activate_grad(ActivationKind kind, double x, double y);
ActivationKind parse_activation(const std::string& name);
std::string to_string(ActivationKind kind);

// Plain value kernels. The graph ops in ops.hpp route through these.

Tensor matmul(const Tensor& a, const Tensor& b);
/// a^T b without materialising the transpose.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a b^T without materialising the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor apply(ActivationKind kind, const Tensor& a);

ComplexPair complex_matmul(const ComplexPair& x, const ComplexPair& w);
ComplexPair split_activation(const ComplexPair& z, ActivationKind f);
ComplexPair complex_hadamard(const ComplexPair& a, const ComplexPair& b);
Tensor complex_magnitude(const ComplexPair& z, double eps = 0.0);

}  // namespace cplx
