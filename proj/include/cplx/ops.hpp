#pragma once

#include "cplx/graph.hpp"

#include <cstddef>
#include <vector>

namespace cplx {

// Differentiable primitives recorded on a Graph. Shapes must match exactly
// unless a broadcast is spelled out in the name.

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
/// min(a, c) element-wise; the gradient passes where a < c.
Var clamp_max(const Var& a, double c);
Var matmul(const Var& a, const Var& b);
/// x[..., n] + b[n]
Var add_bias(const Var& x, const Var& b);
/// x[B, C, ...] + b[C]
Var add_channel_bias(const Var& x, const Var& b);
/// x * c where c matches the trailing dimensions of x.
Var mul_broadcast(const Var& x, const Tensor& c);
Var activation(const Var& x, ActivationKind kind);
Var square(const Var& x);
Var abs(const Var& x);
Var sum(const Var& x);
Var mean(const Var& x);
Var reshape(const Var& x, Shape shape);
Var concat(const std::vector<Var>& parts, std::size_t axis);
Var slice(const Var& x, std::size_t axis, std::size_t begin, std::size_t end);
Var permute(const Var& x, const std::vector<std::size_t>& perm);
/// sqrt(re^2 + im^2 + eps). The gradient is taken as zero where the magnitude is exactly 0.
Var magnitude(const Var& re, const Var& im, double eps);
/// x / m element-wise, where m is strictly positive.
Var divide(const Var& x, const Var& m);

/// Pre-activation gates z[B, 4H] (order i, f, g, o) and previous cell c[B, H]
/// to [B, 2H] = [h | c]. An invalid c_prev means a zero initial cell.
Var lstm_cell(const Var& z, const Var& c_prev);

struct ConvGeometry {
  std::size_t kernel_t = 1, kernel_f = 1;
  std::size_t stride_t = 1, stride_f = 1;
  std::size_t pad_t_begin = 0, pad_t_end = 0;
  std::size_t pad_f_begin = 0, pad_f_end = 0;

  /// Cross-correlation output extent; throws when the kernel does not fit.
  std::size_t conv_out_t(std::size_t in) const;
  std::size_t conv_out_f(std::size_t in) const;
  /// Transposed output extent before output padding.
  std::size_t deconv_out_t(std::size_t in) const;
  std::size_t deconv_out_f(std::size_t in) const;
};

// Value kernels (no graph). x[B, C, T, F]; conv weight w[Co, C, kT, kF].
Tensor conv2d_values(const Tensor& x, const Tensor& w, const ConvGeometry& g);
/// Transposed convolution; weight w[Ci, Co, kT, kF]; output [B, Co, out_t, out_f].
Tensor deconv2d_values(const Tensor& x, const Tensor& w, const ConvGeometry& g,
                       std::size_t out_t, std::size_t out_f);

Var conv2d(const Var& x, const Var& w, const ConvGeometry& g);
Var deconv2d(const Var& x, const Var& w, const ConvGeometry& g, std::size_t out_t,
             std::size_t out_f);

/// frames[B, T, N] summed into [B, out_len] at offsets t*hop.
Var overlap_add(const Var& frames, std::size_t hop, std::size_t out_len);

/// Per-row SI-SDR in dB of est[B, L] against fixed ref[B, L], clamped to +-cap.
Var si_sdr_rows(const Var& est, const Tensor& ref, double cap);

// Complex ops on (re, im) pairs.
CVar cadd(const CVar& a, const CVar& b);
CVar csub(const CVar& a, const CVar& b);
CVar complex_matmul(const CVar& x, const CVar& w);
CVar complex_hadamard(const CVar& a, const CVar& b);
CVar split_activation(const CVar& z, ActivationKind f);
Var complex_magnitude(const CVar& z, double eps);
/// Real gate applied to both parts.
CVar scale_by(const CVar& z, const Var& gate);
CVar creshape(const CVar& z, Shape shape);
CVar cpermute(const CVar& z, const std::vector<std::size_t>& perm);
CVar cslice(const CVar& z, std::size_t axis, std::size_t begin, std::size_t end);
CVar cconcat(const std::vector<CVar>& parts, std::size_t axis);

}  // namespace cplx
