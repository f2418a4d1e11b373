#include "cplx/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cplx {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) throw DimensionError(op, a.shape(), b.shape());
}

void accumulate(Tensor& dst, const Tensor& src, double s = 1.0) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
}

// Split a shape around `axis` into (outer, extent, inner).
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  }
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void im2col(const double* x, std::size_t channels, std::size_t t_in, std::size_t f_in,
            const ConvGeometry& g, std::size_t t_out, std::size_t f_out, double* cols) {
  const std::size_t positions = t_out * f_out;
  std::size_t row = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    const double* xc = x + c * t_in * f_in;
    for (std::size_t kt = 0; kt < g.kernel_t; ++kt) {
      for (std::size_t kf = 0; kf < g.kernel_f; ++kf, ++row) {
        double* dst = cols + row * positions;
        for (std::size_t to = 0; to < t_out; ++to) {
          const auto t = static_cast<std::ptrdiff_t>(to * g.stride_t + kt) -
                         static_cast<std::ptrdiff_t>(g.pad_t_begin);
          for (std::size_t fo = 0; fo < f_out; ++fo) {
            const auto f = static_cast<std::ptrdiff_t>(fo * g.stride_f + kf) -
                           static_cast<std::ptrdiff_t>(g.pad_f_begin);
            const bool inside = t >= 0 && f >= 0 && t < static_cast<std::ptrdiff_t>(t_in) &&
                                f < static_cast<std::ptrdiff_t>(f_in);
            dst[to * f_out + fo] = inside ? xc[t * f_in + f] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, std::size_t channels, std::size_t t_in, std::size_t f_in,
            const ConvGeometry& g, std::size_t t_out, std::size_t f_out, double* x) {
  const std::size_t positions = t_out * f_out;
  std::size_t row = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    double* xc = x + c * t_in * f_in;
    for (std::size_t kt = 0; kt < g.kernel_t; ++kt) {
      for (std::size_t kf = 0; kf < g.kernel_f; ++kf, ++row) {
        const double* src = cols + row * positions;
        for (std::size_t to = 0; to < t_out; ++to) {
          const auto t = static_cast<std::ptrdiff_t>(to * g.stride_t + kt) -
                         static_cast<std::ptrdiff_t>(g.pad_t_begin);
          if (t < 0 || t >= static_cast<std::ptrdiff_t>(t_in)) continue;
          for (std::size_t fo = 0; fo < f_out; ++fo) {
            const auto f = static_cast<std::ptrdiff_t>(fo * g.stride_f + kf) -
                           static_cast<std::ptrdiff_t>(g.pad_f_begin);
            if (f < 0 || f >= static_cast<std::ptrdiff_t>(f_in)) continue;
            xc[t * f_in + f] += src[to * f_out + fo];
          }
        }
      }
    }
  }
}

void require_rank4(const char* op, const Tensor& t) {
  if (t.rank() != 4) {
    throw DimensionError(std::string(op) + ": expected rank-4 tensor, got " +
                         shape_str(t.shape()));
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  same_shape("add", a, b);
  return a.graph().record(cplx::add(a.value(), b.value()), {a, b}, [](BackwardContext& c) {
    if (c.needs(0)) accumulate(c.grad_in(0), c.grad_out());
    if (c.needs(1)) accumulate(c.grad_in(1), c.grad_out());
  });
}

Var sub(const Var& a, const Var& b) {
  same_shape("sub", a, b);
  return a.graph().record(cplx::sub(a.value(), b.value()), {a, b}, [](BackwardContext& c) {
    if (c.needs(0)) accumulate(c.grad_in(0), c.grad_out());
    if (c.needs(1)) accumulate(c.grad_in(1), c.grad_out(), -1.0);
  });
}

Var mul(const Var& a, const Var& b) {
  same_shape("mul", a, b);
  return a.graph().record(hadamard(a.value(), b.value()), {a, b}, [](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    if (c.needs(0)) {
      Tensor& d = c.grad_in(0);
      const Tensor& y = c.input(1);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * y[i];
    }
    if (c.needs(1)) {
      Tensor& d = c.grad_in(1);
      const Tensor& x = c.input(0);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * x[i];
    }
  });
}

Var scale(const Var& a, double s) {
  return a.graph().record(cplx::scale(a.value(), s), {a}, [s](BackwardContext& c) {
    accumulate(c.grad_in(0), c.grad_out(), s);
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor out = a.value();
  for (auto& v : out.data()) v += s;
  return a.graph().record(std::move(out), {a}, [](BackwardContext& c) {
    accumulate(c.grad_in(0), c.grad_out());
  });
}

Var clamp_max(const Var& a, double c) {
  Tensor out = a.value();
  for (auto& v : out.data()) v = std::min(v, c);
  return a.graph().record(std::move(out), {a}, [c](BackwardContext& ctx) {
    const Tensor& x = ctx.input(0);
    const Tensor& g = ctx.grad_out();
    Tensor& d = ctx.grad_in(0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (x[i] < c) d[i] += g[i];
    }
  });
}

Var matmul(const Var& a, const Var& b) {
  return a.graph().record(cplx::matmul(a.value(), b.value()), {a, b}, [](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    if (c.needs(0)) accumulate(c.grad_in(0), matmul_nt(g, c.input(1)));
    if (c.needs(1)) accumulate(c.grad_in(1), matmul_tn(c.input(0), g));
  });
}

Var add_bias(const Var& x, const Var& b) {
  const Shape& xs = x.shape();
  if (b.value().rank() != 1 || xs.back() != b.dim(0)) {
    throw DimensionError("add_bias", xs, b.shape());
  }
  const std::size_t n = b.dim(0);
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i % n];
  return x.graph().record(std::move(out), {x, b}, [n](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    if (c.needs(0)) accumulate(c.grad_in(0), g);
    if (c.needs(1)) {
      Tensor& db = c.grad_in(1);
      for (std::size_t i = 0; i < g.size(); ++i) db[i % n] += g[i];
    }
  });
}

Var add_channel_bias(const Var& x, const Var& b) {
  const Shape& xs = x.shape();
  if (xs.size() < 2 || b.value().rank() != 1 || xs[1] != b.dim(0)) {
    throw DimensionError("add_channel_bias", xs, b.shape());
  }
  const std::size_t batch = xs[0], channels = xs[1];
  const std::size_t inner = x.value().size() / (batch * channels);
  Tensor out = x.value();
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      double* p = out.ptr() + (n * channels + ch) * inner;
      const double bv = b.value()[ch];
      for (std::size_t i = 0; i < inner; ++i) p[i] += bv;
    }
  }
  return x.graph().record(std::move(out), {x, b}, [batch, channels, inner](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    if (c.needs(0)) accumulate(c.grad_in(0), g);
    if (c.needs(1)) {
      Tensor& db = c.grad_in(1);
      for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t ch = 0; ch < channels; ++ch) {
          const double* p = g.ptr() + (n * channels + ch) * inner;
          double s = 0.0;
          for (std::size_t i = 0; i < inner; ++i) s += p[i];
          db[ch] += s;
        }
      }
    }
  });
}

Var mul_broadcast(const Var& x, const Tensor& coeff) {
  const Shape& xs = x.shape();
  const Shape& cs = coeff.shape();
  if (cs.size() > xs.size() || !std::equal(cs.rbegin(), cs.rend(), xs.rbegin())) {
    throw DimensionError("mul_broadcast", xs, cs);
  }
  const std::size_t period = coeff.size();
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= coeff[i % period];
  return x.graph().record(std::move(out), {x}, [coeff, period](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    Tensor& d = c.grad_in(0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * coeff[i % period];
  });
}

Var activation(const Var& x, ActivationKind kind) {
  if (kind == ActivationKind::Identity) return x;
  return x.graph().record(apply(kind, x.value()), {x}, [kind](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    const Tensor& in = c.input(0);
    const Tensor& out = c.output();
    Tensor& d = c.grad_in(0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * activate_grad(kind, in[i], out[i]);
  });
}

Var square(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v *= v;
  return x.graph().record(std::move(out), {x}, [](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    const Tensor& in = c.input(0);
    Tensor& d = c.grad_in(0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += 2.0 * in[i] * g[i];
  });
}

Var abs(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = std::fabs(v);
  return x.graph().record(std::move(out), {x}, [](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    const Tensor& in = c.input(0);
    Tensor& d = c.grad_in(0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] += in[i] > 0.0 ? g[i] : (in[i] < 0.0 ? -g[i] : 0.0);
    }
  });
}

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.graph().record(Tensor::scalar(s), {x}, [](BackwardContext& c) {
    const double g = c.grad_out()[0];
    for (auto& v : c.grad_in(0).data()) v += g;
  });
}

Var mean(const Var& x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.graph().record(std::move(out), {x}, [](BackwardContext& c) {
    accumulate(c.grad_in(0), c.grad_out());
  });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  Shape out_shape = parts.front().shape();
  if (axis >= out_shape.size()) throw DimensionError("concat: axis out of range");
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    Shape ref = parts.front().shape();
    s[axis] = ref[axis] = 0;
    if (s != ref) throw DimensionError("concat", parts.front().shape(), p.shape());
    out_shape[axis] += p.dim(axis);
  }
  Tensor out(out_shape);
  const AxisSplit os = split_axis(out_shape, axis);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t ext = p.dim(axis);
    const double* src = p.value().ptr();
    for (std::size_t o = 0; o < os.outer; ++o) {
      std::copy_n(src + o * ext * os.inner, ext * os.inner,
                  out.ptr() + (o * os.extent + offset) * os.inner);
    }
    offset += ext;
  }
  std::vector<std::size_t> extents;
  for (const auto& p : parts) extents.push_back(p.dim(axis));
  return parts.front().graph().record(
      std::move(out), parts, [os, offsets, extents](BackwardContext& c) {
        const Tensor& g = c.grad_out();
        for (std::size_t k = 0; k < extents.size(); ++k) {
          if (!c.needs(k)) continue;
          Tensor& d = c.grad_in(k);
          const std::size_t ext = extents[k];
          for (std::size_t o = 0; o < os.outer; ++o) {
            const double* src = g.ptr() + (o * os.extent + offsets[k]) * os.inner;
            double* dst = d.ptr() + o * ext * os.inner;
            for (std::size_t i = 0; i < ext * os.inner; ++i) dst[i] += src[i];
          }
        }
      });
}

Var slice(const Var& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& xs = x.shape();
  if (axis >= xs.size() || begin >= end || end > xs[axis]) {
    throw DimensionError("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") on axis " + std::to_string(axis) + " of " + shape_str(xs));
  }
  const AxisSplit is = split_axis(xs, axis);
  Shape out_shape = xs;
  out_shape[axis] = end - begin;
  Tensor out(out_shape);
  const std::size_t ext = end - begin;
  for (std::size_t o = 0; o < is.outer; ++o) {
    std::copy_n(x.value().ptr() + (o * is.extent + begin) * is.inner, ext * is.inner,
                out.ptr() + o * ext * is.inner);
  }
  return x.graph().record(std::move(out), {x}, [is, begin, ext](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    Tensor& d = c.grad_in(0);
    for (std::size_t o = 0; o < is.outer; ++o) {
      const double* src = g.ptr() + o * ext * is.inner;
      double* dst = d.ptr() + (o * is.extent + begin) * is.inner;
      for (std::size_t i = 0; i < ext * is.inner; ++i) dst[i] += src[i];
    }
  });
}

namespace {

// Gather index map: out[i] = in[map[i]].
std::vector<std::size_t> permute_map(const Shape& in, const std::vector<std::size_t>& perm) {
  const std::size_t rank = in.size();
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank - 1; i-- > 0;) in_strides[i] = in_strides[i + 1] * in[i + 1];
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) out[i] = in[perm[i]];
  const std::size_t n = shape_numel(in);
  std::vector<std::size_t> map(n);
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < rank; ++i) src += idx[i] * in_strides[perm[i]];
    map[flat] = src;
    for (std::size_t i = rank; i-- > 0;) {
      if (++idx[i] < out[i]) break;
      idx[i] = 0;
    }
  }
  return map;
}

}  // namespace

Var permute(const Var& x, const std::vector<std::size_t>& perm) {
  const Shape& xs = x.shape();
  std::vector<std::size_t> check = perm;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < check.size(); ++i) {
    if (check.size() != xs.size() || check[i] != i) {
      throw DimensionError("permute: invalid permutation for " + shape_str(xs));
    }
  }
  Shape out_shape(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out_shape[i] = xs[perm[i]];
  auto map = std::make_shared<std::vector<std::size_t>>(permute_map(xs, perm));
  Tensor out(out_shape);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[(*map)[i]];
  return x.graph().record(std::move(out), {x}, [map](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    Tensor& d = c.grad_in(0);
    for (std::size_t i = 0; i < g.size(); ++i) d[(*map)[i]] += g[i];
  });
}

Var magnitude(const Var& re, const Var& im, double eps) {
  same_shape("magnitude", re, im);
  if (eps < 0.0) throw std::invalid_argument("magnitude: eps must be >= 0");
  Tensor out = complex_magnitude(ComplexPair{re.value(), im.value()}, eps);
  return re.graph().record(std::move(out), {re, im}, [](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    const Tensor& m = c.output();
    for (std::size_t k = 0; k < 2; ++k) {
      if (!c.needs(k)) continue;
      const Tensor& part = c.input(k);
      Tensor& d = c.grad_in(k);
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (m[i] > 0.0) d[i] += g[i] * part[i] / m[i];
      }
    }
  });
}

Var divide(const Var& x, const Var& m) {
  same_shape("divide", x, m);
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= m.value()[i];
  return x.graph().record(std::move(out), {x, m}, [](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    const Tensor& den = c.input(1);
    if (c.needs(0)) {
      Tensor& d = c.grad_in(0);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] / den[i];
    }
    if (c.needs(1)) {
      const Tensor& y = c.output();
      Tensor& d = c.grad_in(1);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g[i] * y[i] / den[i];
    }
  });
}

Var lstm_cell(const Var& z, const Var& c_prev) {
  const Shape& zs = z.shape();
  if (zs.size() != 2 || zs[1] % 4 != 0) {
    throw DimensionError("lstm_cell: gate block must be [B, 4H], got " + shape_str(zs));
  }
  const std::size_t batch = zs[0], hidden = zs[1] / 4;
  const bool has_prev = c_prev.valid();
  if (has_prev && c_prev.shape() != Shape{batch, hidden}) {
    throw DimensionError("lstm_cell: cell state", c_prev.shape(), Shape{batch, hidden});
  }
  Tensor out({batch, 2 * hidden});
  const Tensor& zv = z.value();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* zr = zv.ptr() + b * 4 * hidden;
    for (std::size_t j = 0; j < hidden; ++j) {
      const double i = sigmoid(zr[j]);
      const double f = sigmoid(zr[hidden + j]);
      const double gg = std::tanh(zr[2 * hidden + j]);
      const double o = sigmoid(zr[3 * hidden + j]);
      const double cp = has_prev ? c_prev.value()[b * hidden + j] : 0.0;
      const double cn = f * cp + i * gg;
      out[b * 2 * hidden + j] = o * std::tanh(cn);
      out[b * 2 * hidden + hidden + j] = cn;
    }
  }
  std::vector<Var> inputs{z};
  if (has_prev) inputs.push_back(c_prev);
  return z.graph().record(std::move(out), inputs, [batch, hidden, has_prev](BackwardContext& c) {
    const Tensor& g = c.grad_out();
    const Tensor& zv = c.input(0);
    const Tensor& y = c.output();
    const bool want_z = c.needs(0);
    const bool want_c = has_prev && c.needs(1);
    Tensor* dz = want_z ? &c.grad_in(0) : nullptr;
    Tensor* dcp = want_c ? &c.grad_in(1) : nullptr;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* zr = zv.ptr() + b * 4 * hidden;
      for (std::size_t j = 0; j < hidden; ++j) {
        const double i = sigmoid(zr[j]);
        const double f = sigmoid(zr[hidden + j]);
        const double gg = std::tanh(zr[2 * hidden + j]);
        const double o = sigmoid(zr[3 * hidden + j]);
        const double cp = has_prev ? c.input(1)[b * hidden + j] : 0.0;
        const double cn = y[b * 2 * hidden + hidden + j];
        const double tc = std::tanh(cn);
        const double gh = g[b * 2 * hidden + j];
        const double dc = g[b * 2 * hidden + hidden + j] + gh * o * (1.0 - tc * tc);
        if (dz) {
          double* dzr = dz->ptr() + b * 4 * hidden;
          dzr[j] += dc * gg * i * (1.0 - i);
          dzr[hidden + j] += dc * cp * f * (1.0 - f);
          dzr[2 * hidden + j] += dc * i * (1.0 - gg * gg);
          dzr[3 * hidden + j] += gh * tc * o * (1.0 - o);
        }
        if (dcp) (*dcp)[b * hidden + j] += dc * f;
      }
    }
  });
}

std::size_t ConvGeometry::conv_out_t(std::size_t in) const {
  const std::size_t padded = in + pad_t_begin + pad_t_end;
  if (stride_t == 0 || padded < kernel_t) {
    throw DimensionError("conv: time extent " + std::to_string(in) + " too small for kernel " +
                         std::to_string(kernel_t));
  }
  return (padded - kernel_t) / stride_t + 1;
}

std::size_t ConvGeometry::conv_out_f(std::size_t in) const {
  const std::size_t padded = in + pad_f_begin + pad_f_end;
  if (stride_f == 0 || padded < kernel_f) {
    throw DimensionError("conv: frequency extent " + std::to_string(in) +
                         " too small for kernel " + std::to_string(kernel_f));
  }
  return (padded - kernel_f) / stride_f + 1;
}

std::size_t ConvGeometry::deconv_out_t(std::size_t in) const {
  const std::size_t full = (in - 1) * stride_t + kernel_t;
  if (full <= pad_t_begin + pad_t_end) throw DimensionError("deconv: padding exceeds output");
  return full - pad_t_begin - pad_t_end;
}

std::size_t ConvGeometry::deconv_out_f(std::size_t in) const {
  const std::size_t full = (in - 1) * stride_f + kernel_f;
  if (full <= pad_f_begin + pad_f_end) throw DimensionError("deconv: padding exceeds output");
  return full - pad_f_begin - pad_f_end;
}

Tensor conv2d_values(const Tensor& x, const Tensor& w, const ConvGeometry& g) {
  require_rank4("conv2d", x);
  require_rank4("conv2d", w);
  const std::size_t batch = x.dim(0), cin = x.dim(1), t_in = x.dim(2), f_in = x.dim(3);
  const std::size_t cout = w.dim(0);
  if (w.dim(1) != cin || w.dim(2) != g.kernel_t || w.dim(3) != g.kernel_f) {
    throw DimensionError("conv2d", x.shape(), w.shape());
  }
  const std::size_t t_out = g.conv_out_t(t_in), f_out = g.conv_out_f(f_in);
  const std::size_t rows = cin * g.kernel_t * g.kernel_f, positions = t_out * f_out;
  Tensor y({batch, cout, t_out, f_out});
  std::vector<double> cols(rows * positions);
  ConstMap wm(w.ptr(), cout, rows);
  for (std::size_t b = 0; b < batch; ++b) {
    im2col(x.ptr() + b * cin * t_in * f_in, cin, t_in, f_in, g, t_out, f_out, cols.data());
    MutMap(y.ptr() + b * cout * positions, cout, positions).noalias() =
        wm * ConstMap(cols.data(), rows, positions);
  }
  return y;
}

Tensor deconv2d_values(const Tensor& x, const Tensor& w, const ConvGeometry& g,
                       std::size_t out_t, std::size_t out_f) {
  require_rank4("deconv2d", x);
  require_rank4("deconv2d", w);
  const std::size_t batch = x.dim(0), cin = x.dim(1), t_in = x.dim(2), f_in = x.dim(3);
  const std::size_t cout = w.dim(1);
  if (w.dim(0) != cin || w.dim(2) != g.kernel_t || w.dim(3) != g.kernel_f) {
    throw DimensionError("deconv2d", x.shape(), w.shape());
  }
  const std::size_t rows = cout * g.kernel_t * g.kernel_f, positions = t_in * f_in;
  Tensor y({batch, cout, out_t, out_f});
  std::vector<double> cols(rows * positions);
  ConstMap wm(w.ptr(), cin, rows);
  for (std::size_t b = 0; b < batch; ++b) {
    MutMap(cols.data(), rows, positions).noalias() =
        wm.transpose() * ConstMap(x.ptr() + b * cin * positions, cin, positions);
    col2im(cols.data(), cout, out_t, out_f, g, t_in, f_in, y.ptr() + b * cout * out_t * out_f);
  }
  return y;
}

Var conv2d(const Var& x, const Var& w, const ConvGeometry& g) {
  Tensor y = conv2d_values(x.value(), w.value(), g);
  return x.graph().record(std::move(y), {x, w}, [g](BackwardContext& c) {
    const Tensor& xv = c.input(0);
    const Tensor& wv = c.input(1);
    const Tensor& gy = c.grad_out();
    const std::size_t batch = xv.dim(0), cin = xv.dim(1), t_in = xv.dim(2), f_in = xv.dim(3);
    const std::size_t cout = wv.dim(0), t_out = gy.dim(2), f_out = gy.dim(3);
    const std::size_t rows = cin * g.kernel_t * g.kernel_f, positions = t_out * f_out;
    std::vector<double> cols(rows * positions);
    ConstMap wm(wv.ptr(), cout, rows);
    const bool want_x = c.needs(0), want_w = c.needs(1);
    Tensor* dx = want_x ? &c.grad_in(0) : nullptr;
    Tensor* dw = want_w ? &c.grad_in(1) : nullptr;
    for (std::size_t b = 0; b < batch; ++b) {
      ConstMap gym(gy.ptr() + b * cout * positions, cout, positions);
      if (dw) {
        im2col(xv.ptr() + b * cin * t_in * f_in, cin, t_in, f_in, g, t_out, f_out, cols.data());
        MutMap(dw->ptr(), cout, rows).noalias() +=
            gym * ConstMap(cols.data(), rows, positions).transpose();
      }
      if (dx) {
        MutMap(cols.data(), rows, positions).noalias() = wm.transpose() * gym;
        col2im(cols.data(), cin, t_in, f_in, g, t_out, f_out, dx->ptr() + b * cin * t_in * f_in);
      }
    }
  });
}

Var deconv2d(const Var& x, const Var& w, const ConvGeometry& g, std::size_t out_t,
             std::size_t out_f) {
  Tensor y = deconv2d_values(x.value(), w.value(), g, out_t, out_f);
  return x.graph().record(std::move(y), {x, w}, [g](BackwardContext& c) {
    const Tensor& xv = c.input(0);
    const Tensor& wv = c.input(1);
    const Tensor& gy = c.grad_out();
    const std::size_t batch = xv.dim(0), cin = xv.dim(1), t_in = xv.dim(2), f_in = xv.dim(3);
    const std::size_t cout = wv.dim(1), out_t = gy.dim(2), out_f = gy.dim(3);
    const std::size_t rows = cout * g.kernel_t * g.kernel_f, positions = t_in * f_in;
    std::vector<double> cols(rows * positions);
    ConstMap wm(wv.ptr(), cin, rows);
    const bool want_x = c.needs(0), want_w = c.needs(1);
    Tensor* dx = want_x ? &c.grad_in(0) : nullptr;
    Tensor* dw = want_w ? &c.grad_in(1) : nullptr;
    for (std::size_t b = 0; b < batch; ++b) {
      im2col(gy.ptr() + b * cout * out_t * out_f, cout, out_t, out_f, g, t_in, f_in,
             cols.data());
      ConstMap cm(cols.data(), rows, positions);
      if (dx) MutMap(dx->ptr() + b * cin * positions, cin, positions).noalias() += wm * cm;
      if (dw) {
        MutMap(dw->ptr(), cin, rows).noalias() +=
            ConstMap(xv.ptr() + b * cin * positions, cin, positions) * cm.transpose();
      }
    }
  });
}

Var overlap_add(const Var& frames, std::size_t hop, std::size_t out_len) {
  const Shape& fs = frames.shape();
  if (fs.size() != 3 || hop == 0) {
    throw DimensionError("overlap_add: expected frames [B, T, N], got " + shape_str(fs));
  }
  const std::size_t batch = fs[0], count = fs[1], width = fs[2];
  Tensor out({batch, out_len});
  const Tensor& fv = frames.value();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < count; ++t) {
      const double* src = fv.ptr() + (b * count + t) * width;
      double* dst = out.ptr() + b * out_len;
      for (std::size_t n = 0; n < width && t * hop + n < out_len; ++n) dst[t * hop + n] += src[n];
    }
  }
  return frames.graph().record(
      std::move(out), {frames}, [batch, count, width, hop, out_len](BackwardContext& c) {
        const Tensor& g = c.grad_out();
        Tensor& d = c.grad_in(0);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t t = 0; t < count; ++t) {
            double* dst = d.ptr() + (b * count + t) * width;
            const double* src = g.ptr() + b * out_len;
            for (std::size_t n = 0; n < width && t * hop + n < out_len; ++n) {
              dst[n] += src[t * hop + n];
            }
          }
        }
      });
}

Var si_sdr_rows(const Var& est, const Tensor& ref, double cap) {
  if (est.shape() != ref.shape() || ref.rank() != 2) {
    throw DimensionError("si_sdr_rows", est.shape(), ref.shape());
  }
  const std::size_t rows = ref.dim(0), len = ref.dim(1);
  const Tensor& e = est.value();
  Tensor out({rows});
  // Per row: alpha, 10/ln10 / P, 10/ln10 / Q, clamped flag.
  std::vector<double> alpha(rows), kp(rows), kq(rows);
  std::vector<char> clamped(rows, 0);
  const double k = 10.0 / std::log(10.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ep = e.ptr() + r * len;
    const double* rp = ref.ptr() + r * len;
    double er = 0.0, rr = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      er += ep[i] * rp[i];
      rr += rp[i] * rp[i];
    }
    if (rr <= 0.0) throw std::invalid_argument("si_sdr: zero-energy reference");
    const double a = er / rr;
    double q = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double n = ep[i] - a * rp[i];
      q += n * n;
    }
    const double p = a * a * rr;
    alpha[r] = a;
    double value;
    if (p <= 0.0) {
      value = -cap;
      clamped[r] = 1;
    } else if (q <= 0.0) {
      value = cap;
      clamped[r] = 1;
    } else {
      value = k * std::log(p / q);
      if (value >= cap || value <= -cap) {
        value = std::clamp(value, -cap, cap);
        clamped[r] = 1;
      }
      kp[r] = k / p;
      kq[r] = k / q;
    }
    out[r] = value;
  }
  return est.graph().record(
      std::move(out), {est}, [ref, rows, len, alpha, kp, kq, clamped](BackwardContext& c) {
        const Tensor& g = c.grad_out();
        const Tensor& e = c.input(0);
        Tensor& d = c.grad_in(0);
        for (std::size_t r = 0; r < rows; ++r) {
          if (clamped[r]) continue;
          const double* ep = e.ptr() + r * len;
          const double* rp = ref.ptr() + r * len;
          double* dp = d.ptr() + r * len;
          const double a = alpha[r];
          // d/de [k ln P - k ln Q] with dP = 2 a r, dQ = 2 (e - a r).
          for (std::size_t i = 0; i < len; ++i) {
            const double n = ep[i] - a * rp[i];
            dp[i] += g[r] * (kp[r] * 2.0 * a * rp[i] - kq[r] * 2.0 * n);
          }
        }
      });
}

CVar cadd(const CVar& a, const CVar& b) { return {add(a.re, b.re), add(a.im, b.im)}; }
CVar csub(const CVar& a, const CVar& b) { return {sub(a.re, b.re), sub(a.im, b.im)}; }

CVar complex_matmul(const CVar& x, const CVar& w) {
  return {sub(matmul(x.re, w.re), matmul(x.im, w.im)),
          add(matmul(x.re, w.im), matmul(x.im, w.re))};
}

CVar complex_hadamard(const CVar& a, const CVar& b) {
  return {sub(mul(a.re, b.re), mul(a.im, b.im)), add(mul(a.re, b.im), mul(a.im, b.re))};
}

CVar split_activation(const CVar& z, ActivationKind f) {
  return {activation(z.re, f), activation(z.im, f)};
}

Var complex_magnitude(const CVar& z, double eps) { return magnitude(z.re, z.im, eps); }

CVar scale_by(const CVar& z, const Var& gate) { return {mul(z.re, gate), mul(z.im, gate)}; }

CVar creshape(const CVar& z, Shape shape) { return {reshape(z.re, shape), reshape(z.im, shape)}; }

CVar cpermute(const CVar& z, const std::vector<std::size_t>& perm) {
  return {permute(z.re, perm), permute(z.im, perm)};
}

CVar cslice(const CVar& z, std::size_t axis, std::size_t begin, std::size_t end) {
  return {slice(z.re, axis, begin, end), slice(z.im, axis, begin, end)};
}

CVar cconcat(const std::vector<CVar>& parts, std::size_t axis) {
  std::vector<Var> re, im;
  for (const auto& p : parts) {
    re.push_back(p.re);
    im.push_back(p.im);
  }
  return {concat(re, axis), concat(im, axis)};
}

}  // namespace cplx
