#pragma once

#include "cplx/graph.hpp"
#include "cplx/ops.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cplx {

enum class Domain { Real, Complex };
enum class LstmVariant { Real, QuasiComplex, FullComplex };
enum class Gating { RealSigmoid, Separate, Magnitude };
/// Bias layout for LSTM gates: one vector per gate, or separate input and hidden vectors.
enum class LstmBias { PerGate, InputAndHidden };

std::string to_string(Domain d);
std::string to_string(LstmVariant v);
std::string to_string(Gating g);
std::string to_string(LstmBias b);

/// Deterministic uniform initialiser; bit-identical across platforms.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}
  Tensor uniform(Shape shape, double bound);
  double next_unit();

 private:
  std::mt19937_64 rng_;
};

/// Real or complex weight: the imaginary part is present only in the complex domain.
struct Weight {
  Parameter re;
  std::optional<Parameter> im;

  Weight() = default;
  Weight(const std::string& name, Domain domain, const Shape& shape, double bound,
         Initializer& init);
  std::size_t count() const { return re.size() + (im ? im->size() : 0); }
  void collect(std::vector<Parameter*>& out);
  Var bind_re(Graph& g) { return g.param(re); }
  CVar bind(Graph& g) { return {g.param(re), g.param(*im)}; }
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::size_t param_count() const = 0;
  /// Weight multiply-accumulates for one forward pass on `input` (batch included).
  virtual std::uint64_t mac_count(const Shape& input) const = 0;
  virtual void collect(std::vector<Parameter*>& out) = 0;
  virtual Domain domain() const = 0;
};

class LinearLayer final : public Layer {
 public:
  LinearLayer(std::string name, Domain domain, std::size_t in, std::size_t out, bool use_bias,
              Initializer& init);

  /// x[..., in] -> [..., out]
  Var forward(Graph& g, const Var& x);
  CVar forward(Graph& g, const CVar& x);

  std::size_t param_count() const override;
  std::uint64_t mac_count(const Shape& input) const override;
  void collect(std::vector<Parameter*>& out) override;
  Domain domain() const override { return domain_; }
  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Weight& weight() { return w_; }
  std::optional<Weight>& bias() { return b_; }

 private:
  std::string name_;
  Domain domain_;
  std::size_t in_, out_;
  Weight w_;
  std::optional<Weight> b_;
};

struct ConvOptions {
  std::size_t in_channels = 1, out_channels = 1;
  ConvGeometry geometry;
  bool use_bias = true;
};

/// Convolution (cross-correlation) or its transpose over [B, C, T, F].
class ConvLayer final : public Layer {
 public:
  enum class Kind { Forward, Transposed };

  ConvLayer(std::string name, Kind kind, Domain domain, const ConvOptions& opts,
            Initializer& init);

  /// Output (T, F) for a given input extent. Transposed layers take an explicit
  /// target so skip connections can line up; output padding is derived from it.
  Shape output_shape(const Shape& input, std::optional<Shape> target = std::nullopt) const;

  Var forward(Graph& g, const Var& x, std::optional<Shape> target = std::nullopt);
  CVar forward(Graph& g, const CVar& x, std::optional<Shape> target = std::nullopt);

  std::size_t param_count() const override;
  /// Counted over output positions for both kinds (dense-equivalent convention).
  std::uint64_t mac_count(const Shape& input) const override;
  std::uint64_t mac_count(const Shape& input, const Shape& output) const;
  void collect(std::vector<Parameter*>& out) override;
  Domain domain() const override { return domain_; }
  Kind kind() const { return kind_; }
  const ConvOptions& options() const { return opts_; }
  Weight& kernel() { return w_; }
  std::optional<Weight>& bias() { return b_; }

 private:
  Var apply(Graph& g, const Var& x, const Var& w, const Shape& out_tf) const;

  std::string name_;
  Kind kind_;
  Domain domain_;
  ConvOptions opts_;
  Weight w_;
  std::optional<Weight> b_;
};

/// Real LSTM (optionally split into independent groups), quasi-complex LSTM built
/// from two real sub-LSTMs, or fully complex LSTM. Widths are per part for complex variants.
class LstmLayer final : public Layer {
 public:
  LstmLayer(std::string name, LstmVariant variant, std::size_t in, std::size_t hidden,
            Initializer& init, std::size_t groups = 1, LstmBias bias = LstmBias::PerGate);

  /// Sequences are [T, B, features]; zero initial state.
  Var forward(Graph& g, const Var& x);
  CVar forward(Graph& g, const CVar& x);

  std::size_t param_count() const override;
  std::uint64_t mac_count(const Shape& input) const override;
  void collect(std::vector<Parameter*>& out) override;
  Domain domain() const override;
  LstmVariant variant() const { return variant_; }
  std::size_t hidden() const { return hidden_; }

  /// Closed-form count used by the parity law.
  static std::size_t count_params(LstmVariant variant, std::size_t in, std::size_t hidden,
                                  std::size_t groups, LstmBias bias);

 private:
  struct Cell {
    Weight w_in;      // [in, 4h]
    Weight w_hidden;  // [h, 4h]
    Weight bias;      // [4h]
    std::optional<Weight> bias_hidden;
  };

  Cell make_cell(const std::string& name, Domain domain, std::size_t in, std::size_t h,
                 Initializer& init);
  Var run_real(Graph& g, Cell& cell, const Var& x, std::size_t h);
  CVar run_complex(Graph& g, Cell& cell, const CVar& x, std::size_t h);

  std::string name_;
  LstmVariant variant_;
  std::size_t in_, hidden_, groups_;
  LstmBias bias_mode_;
  std::vector<Cell> cells_;  // real: one per group; quasi: {LSTM_r, LSTM_i}; full: one
};

/// Two parallel convolution branches (feature, gate) combined by a gating rule.
class GluLayer final : public Layer {
 public:
  GluLayer(std::string name, ConvLayer::Kind kind, Domain domain, Gating gating,
           const ConvOptions& opts, Initializer& init, double magnitude_eps = 0.0);

  Var forward(Graph& g, const Var& x, std::optional<Shape> target = std::nullopt);
  CVar forward(Graph& g, const CVar& x, std::optional<Shape> target = std::nullopt);

  /// (sigmoid(|F2|) - 0.5) * 2 on already-computed branch outputs. With eps = 0 the gate
  /// is exactly 0 at the origin, where the magnitude gradient is taken as 0.
  static Var magnitude_gate(const CVar& gate_branch, double eps);

  std::size_t param_count() const override;
  std::uint64_t mac_count(const Shape& input) const override;
  std::uint64_t mac_count(const Shape& input, const Shape& output) const;
  void collect(std::vector<Parameter*>& out) override;
  Domain domain() const override { return feature_.domain(); }
  Gating gating() const { return gating_; }
  ConvLayer& feature_branch() { return feature_; }
  ConvLayer& gate_branch() { return gate_; }
  Shape output_shape(const Shape& input, std::optional<Shape> target = std::nullopt) const {
    return feature_.output_shape(input, target);
  }

 private:
  std::string name_;
  Gating gating_;
  double eps_;
  ConvLayer feature_;
  ConvLayer gate_;
};

}  // namespace cplx
