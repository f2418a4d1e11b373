#include "cplx/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace cplx {

namespace {

void require_domain(const std::string& name, Domain have, Domain want) {
  if (have != want) {
    throw std::invalid_argument("layer '" + name + "': " + to_string(want) +
                                " input given to a " + to_string(have) + " layer");
  }
}

Shape replace_last(Shape s, std::size_t v) {
  s.back() = v;
  return s;
}

}  // namespace

std::string to_string(Domain d) { return d == Domain::Real ? "real" : "complex"; }

std::string to_string(LstmVariant v) {
  switch (v) {
    case LstmVariant::Real: return "real";
    case LstmVariant::QuasiComplex: return "quasi";
    case LstmVariant::FullComplex: return "full";
  }
  return "?";
}

std::string to_string(Gating g) {
  switch (g) {
    case Gating::RealSigmoid: return "sigmoid";
    case Gating::Separate: return "separate";
    case Gating::Magnitude: return "magnitude";
  }
  return "?";
}

std::string to_string(LstmBias b) { return b == LstmBias::PerGate ? "gate" : "dual"; }

double Initializer::next_unit() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

Tensor Initializer::uniform(Shape shape, double bound) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = (2.0 * next_unit() - 1.0) * bound;
  return t;
}

Weight::Weight(const std::string& name, Domain domain, const Shape& shape, double bound,
               Initializer& init)
    : re(name + ".re", init.uniform(shape, bound)) {
  if (domain == Domain::Complex) im.emplace(name + ".im", init.uniform(shape, bound));
}

void Weight::collect(std::vector<Parameter*>& out) {
  out.push_back(&re);
  if (im) out.push_back(&*im);
}

// ---------------------------------------------------------------------------
// Linear

LinearLayer::LinearLayer(std::string name, Domain domain, std::size_t in, std::size_t out,
                         bool use_bias, Initializer& init)
    : name_(std::move(name)), domain_(domain), in_(in), out_(out) {
  if (in == 0 || out == 0) throw std::invalid_argument("linear '" + name_ + "': zero width");
  const double bound = std::sqrt(1.0 / static_cast<double>(in));
  w_ = Weight(name_ + ".w", domain, {in, out}, bound, init);
  if (use_bias) b_.emplace(name_ + ".b", domain, Shape{out}, bound, init);
}

Var LinearLayer::forward(Graph& g, const Var& x) {
  require_domain(name_, domain_, Domain::Real);
  if (x.shape().back() != in_) throw DimensionError("linear " + name_, x.shape(), {in_, out_});
  const std::size_t rows = x.value().size() / in_;
  Var y = matmul(reshape(x, {rows, in_}), w_.bind_re(g));
  if (b_) y = add_bias(y, b_->bind_re(g));
  return reshape(y, replace_last(x.shape(), out_));
}

CVar LinearLayer::forward(Graph& g, const CVar& x) {
  require_domain(name_, domain_, Domain::Complex);
  if (x.shape().back() != in_) throw DimensionError("linear " + name_, x.shape(), {in_, out_});
  const std::size_t rows = x.re.value().size() / in_;
  CVar y = complex_matmul(creshape(x, {rows, in_}), w_.bind(g));
  if (b_) {
    CVar b = b_->bind(g);
    y = {add_bias(y.re, b.re), add_bias(y.im, b.im)};
  }
  return creshape(y, replace_last(x.shape(), out_));
}

std::size_t LinearLayer::param_count() const { return w_.count() + (b_ ? b_->count() : 0); }

std::uint64_t LinearLayer::mac_count(const Shape& input) const {
  if (input.empty() || input.back() != in_) {
    throw DimensionError("linear " + name_ + " mac_count", input, {in_, out_});
  }
  const std::uint64_t rows = shape_numel(input) / in_;
  const std::uint64_t per = static_cast<std::uint64_t>(in_) * out_;
  return rows * per * (domain_ == Domain::Complex ? 4 : 1);
}

void LinearLayer::collect(std::vector<Parameter*>& out) {
  w_.collect(out);
  if (b_) b_->collect(out);
}

// ---------------------------------------------------------------------------
// Convolution

ConvLayer::ConvLayer(std::string name, Kind kind, Domain domain, const ConvOptions& opts,
                     Initializer& init)
    : name_(std::move(name)), kind_(kind), domain_(domain), opts_(opts) {
  const auto& g = opts.geometry;
  if (g.stride_t == 0 || g.stride_f == 0) {
    throw std::invalid_argument("conv '" + name_ + "': stride must be >= 1");
  }
  if (opts.in_channels == 0 || opts.out_channels == 0 || g.kernel_t == 0 || g.kernel_f == 0) {
    throw std::invalid_argument("conv '" + name_ + "': zero extent");
  }
  const double bound =
      std::sqrt(1.0 / static_cast<double>(opts.in_channels * g.kernel_t * g.kernel_f));
  const Shape shape = kind == Kind::Forward
                          ? Shape{opts.out_channels, opts.in_channels, g.kernel_t, g.kernel_f}
                          : Shape{opts.in_channels, opts.out_channels, g.kernel_t, g.kernel_f};
  w_ = Weight(name_ + ".w", domain, shape, bound, init);
  if (opts.use_bias) b_.emplace(name_ + ".b", domain, Shape{opts.out_channels}, bound, init);
}

Shape ConvLayer::output_shape(const Shape& input, std::optional<Shape> target) const {
  if (input.size() != 4 || input[1] != opts_.in_channels) {
    throw DimensionError("conv " + name_ + ": input", input,
                         {0, opts_.in_channels, 0, 0});
  }
  const auto& g = opts_.geometry;
  if (kind_ == Kind::Forward) {
    return {input[0], opts_.out_channels, g.conv_out_t(input[2]), g.conv_out_f(input[3])};
  }
  std::size_t t = g.deconv_out_t(input[2]);
  std::size_t f = g.deconv_out_f(input[3]);
  if (target) {
    const Shape& tgt = *target;
    if (tgt.size() != 2 || tgt[0] < t || tgt[1] < f || tgt[0] - t >= g.stride_t + 1 ||
        tgt[1] - f >= g.stride_f + 1) {
      throw DimensionError("deconv " + name_ + ": target extent unreachable",
                           Shape{t, f}, tgt);
    }
    t = tgt[0];
    f = tgt[1];
  }
  return {input[0], opts_.out_channels, t, f};
}

Var ConvLayer::apply(Graph&, const Var& x, const Var& w, const Shape& out) const {
  if (kind_ == Kind::Forward) return conv2d(x, w, opts_.geometry);
  return deconv2d(x, w, opts_.geometry, out[2], out[3]);
}

Var ConvLayer::forward(Graph& g, const Var& x, std::optional<Shape> target) {
  require_domain(name_, domain_, Domain::Real);
  const Shape out = output_shape(x.shape(), target);
  Var y = apply(g, x, w_.bind_re(g), out);
  if (b_) y = add_channel_bias(y, b_->bind_re(g));
  return y;
}

CVar ConvLayer::forward(Graph& g, const CVar& x, std::optional<Shape> target) {
  require_domain(name_, domain_, Domain::Complex);
  const Shape out = output_shape(x.shape(), target);
  CVar w = w_.bind(g);
  Var re = sub(apply(g, x.re, w.re, out), apply(g, x.im, w.im, out));
  Var im = add(apply(g, x.re, w.im, out), apply(g, x.im, w.re, out));
  if (b_) {
    CVar b = b_->bind(g);
    re = add_channel_bias(re, b.re);
    im = add_channel_bias(im, b.im);
  }
  return {re, im};
}

std::size_t ConvLayer::param_count() const { return w_.count() + (b_ ? b_->count() : 0); }

std::uint64_t ConvLayer::mac_count(const Shape& input) const {
  return mac_count(input, output_shape(input));
}

std::uint64_t ConvLayer::mac_count(const Shape& input, const Shape& output) const {
  const auto& g = opts_.geometry;
  const std::uint64_t per_output = static_cast<std::uint64_t>(input[1]) * g.kernel_t * g.kernel_f;
  const std::uint64_t outputs = shape_numel(output);
  return outputs * per_output * (domain_ == Domain::Complex ? 4 : 1);
}

void ConvLayer::collect(std::vector<Parameter*>& out) {
  w_.collect(out);
  if (b_) b_->collect(out);
}

// ---------------------------------------------------------------------------
// LSTM

LstmLayer::LstmLayer(std::string name, LstmVariant variant, std::size_t in, std::size_t hidden,
                     Initializer& init, std::size_t groups, LstmBias bias)
    : name_(std::move(name)),
      variant_(variant),
      in_(in),
      hidden_(hidden),
      groups_(groups),
      bias_mode_(bias) {
  if (in == 0 || hidden == 0 || groups == 0) {
    throw std::invalid_argument("lstm '" + name_ + "': zero extent");
  }
  if (variant != LstmVariant::Real && groups != 1) {
    throw std::invalid_argument("lstm '" + name_ + "': groups apply to the real variant only");
  }
  if (in % groups != 0 || hidden % groups != 0) {
    throw std::invalid_argument("lstm '" + name_ + "': widths not divisible by groups");
  }
  switch (variant) {
    case LstmVariant::Real:
      for (std::size_t k = 0; k < groups; ++k) {
        cells_.push_back(make_cell(name_ + ".g" + std::to_string(k), Domain::Real, in / groups,
                                   hidden / groups, init));
      }
      break;
    case LstmVariant::QuasiComplex:
      cells_.push_back(make_cell(name_ + ".lstm_r", Domain::Real, in, hidden, init));
      cells_.push_back(make_cell(name_ + ".lstm_i", Domain::Real, in, hidden, init));
      break;
    case LstmVariant::FullComplex:
      cells_.push_back(make_cell(name_ + ".cell", Domain::Complex, in, hidden, init));
      break;
  }
}

LstmLayer::Cell LstmLayer::make_cell(const std::string& name, Domain domain, std::size_t in,
                                     std::size_t h, Initializer& init) {
  const double bound = std::sqrt(1.0 / static_cast<double>(h));
  Cell c;
  c.w_in = Weight(name + ".w_in", domain, {in, 4 * h}, bound, init);
  c.w_hidden = Weight(name + ".w_hidden", domain, {h, 4 * h}, bound, init);
  c.bias = Weight(name + ".b", domain, {4 * h}, bound, init);
  if (bias_mode_ == LstmBias::InputAndHidden) {
    c.bias_hidden.emplace(name + ".b_hidden", domain, Shape{4 * h}, bound, init);
  }
  return c;
}

Domain LstmLayer::domain() const {
  return variant_ == LstmVariant::Real ? Domain::Real : Domain::Complex;
}

Var LstmLayer::run_real(Graph& g, Cell& cell, const Var& x, std::size_t h) {
  const std::size_t steps = x.dim(0), batch = x.dim(1), in = x.dim(2);
  Var xw = matmul(reshape(x, {steps * batch, in}), cell.w_in.bind_re(g));
  xw = add_bias(xw, cell.bias.bind_re(g));
  if (cell.bias_hidden) xw = add_bias(xw, cell.bias_hidden->bind_re(g));
  Var w_hidden = cell.w_hidden.bind_re(g);
  Var h_prev, c_prev;
  std::vector<Var> outputs;
  outputs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Var z = slice(xw, 0, t * batch, (t + 1) * batch);
    if (t > 0) z = add(z, matmul(h_prev, w_hidden));
    Var hc = lstm_cell(z, c_prev);
    h_prev = slice(hc, 1, 0, h);
    c_prev = slice(hc, 1, h, 2 * h);
    outputs.push_back(h_prev);
  }
  return reshape(concat(outputs, 0), {steps, batch, h});
}

CVar LstmLayer::run_complex(Graph& g, Cell& cell, const CVar& x, std::size_t h) {
  const std::size_t steps = x.re.dim(0), batch = x.re.dim(1), in = x.re.dim(2);
  CVar xw = complex_matmul(creshape(x, {steps * batch, in}), cell.w_in.bind(g));
  CVar b = cell.bias.bind(g);
  xw = {add_bias(xw.re, b.re), add_bias(xw.im, b.im)};
  if (cell.bias_hidden) {
    CVar b2 = cell.bias_hidden->bind(g);
    xw = {add_bias(xw.re, b2.re), add_bias(xw.im, b2.im)};
  }
  CVar w_hidden = cell.w_hidden.bind(g);
  CVar h_prev, c_prev;
  std::vector<CVar> outputs;
  outputs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    CVar z = cslice(xw, 0, t * batch, (t + 1) * batch);
    if (t > 0) z = cadd(z, complex_matmul(h_prev, w_hidden));
    CVar i = split_activation(cslice(z, 1, 0, h), ActivationKind::Sigmoid);
    CVar f = split_activation(cslice(z, 1, h, 2 * h), ActivationKind::Sigmoid);
    CVar gg = split_activation(cslice(z, 1, 2 * h, 3 * h), ActivationKind::Tanh);
    CVar o = split_activation(cslice(z, 1, 3 * h, 4 * h), ActivationKind::Sigmoid);
    CVar c = complex_hadamard(i, gg);
    if (t > 0) c = cadd(complex_hadamard(f, c_prev), c);
    h_prev = complex_hadamard(o, split_activation(c, ActivationKind::Tanh));
    c_prev = c;
    outputs.push_back(h_prev);
  }
  return creshape(cconcat(outputs, 0), {steps, batch, h});
}

Var LstmLayer::forward(Graph& g, const Var& x) {
  require_domain(name_, domain(), Domain::Real);
  if (x.shape().size() != 3 || x.dim(2) != in_) {
    throw DimensionError("lstm " + name_ + ": expected [T, B, " + std::to_string(in_) +
                         "], got " + shape_str(x.shape()));
  }
  if (groups_ == 1) return run_real(g, cells_[0], x, hidden_);
  const std::size_t gin = in_ / groups_, gh = hidden_ / groups_;
  std::vector<Var> parts;
  for (std::size_t k = 0; k < groups_; ++k) {
    parts.push_back(run_real(g, cells_[k], slice(x, 2, k * gin, (k + 1) * gin), gh));
  }
  return concat(parts, 2);
}

CVar LstmLayer::forward(Graph& g, const CVar& x) {
  require_domain(name_, domain(), Domain::Complex);
  if (x.shape().size() != 3 || x.re.dim(2) != in_) {
    throw DimensionError("lstm " + name_ + ": expected [T, B, " + std::to_string(in_) +
                         "], got " + shape_str(x.shape()));
  }
  if (variant_ == LstmVariant::FullComplex) return run_complex(g, cells_[0], x, hidden_);

  // F_rr = LSTM_r(X_r), F_ir = LSTM_r(X_i), F_ri = LSTM_i(X_r), F_ii = LSTM_i(X_i);
  // both inputs go through each sub-LSTM as one doubled batch.
  const std::size_t batch = x.re.dim(1);
  Var stacked = concat({x.re, x.im}, 1);
  Var out_r = run_real(g, cells_[0], stacked, hidden_);
  Var out_i = run_real(g, cells_[1], stacked, hidden_);
  Var f_rr = slice(out_r, 1, 0, batch), f_ir = slice(out_r, 1, batch, 2 * batch);
  Var f_ri = slice(out_i, 1, 0, batch), f_ii = slice(out_i, 1, batch, 2 * batch);
  return {sub(f_rr, f_ii), add(f_ri, f_ir)};
}

std::size_t LstmLayer::count_params(LstmVariant variant, std::size_t in, std::size_t hidden,
                                    std::size_t groups, LstmBias bias) {
  const std::size_t nb = bias == LstmBias::PerGate ? 1 : 2;
  auto one = [nb](std::size_t i, std::size_t h) { return 4 * (i * h + h * h + nb * h); };
  switch (variant) {
    case LstmVariant::Real: return groups * one(in / groups, hidden / groups);
    case LstmVariant::QuasiComplex: return 2 * one(in, hidden);
    case LstmVariant::FullComplex: return 2 * one(in, hidden);
  }
  return 0;
}

std::size_t LstmLayer::param_count() const {
  std::size_t n = 0;
  for (const auto& c : cells_) {
    n += c.w_in.count() + c.w_hidden.count() + c.bias.count();
    if (c.bias_hidden) n += c.bias_hidden->count();
  }
  return n;
}

std::uint64_t LstmLayer::mac_count(const Shape& input) const {
  if (input.size() != 3 || input[2] != in_) {
    throw DimensionError("lstm " + name_ + " mac_count", input, {0, 0, in_});
  }
  const std::uint64_t steps_rows = static_cast<std::uint64_t>(input[0]) * input[1];
  auto per_cell = [](std::uint64_t i, std::uint64_t h) { return 4 * h * (i + h); };
  switch (variant_) {
    case LstmVariant::Real:
      return steps_rows * groups_ * per_cell(in_ / groups_, hidden_ / groups_);
    case LstmVariant::QuasiComplex:
      // two sub-LSTMs, each run on both parts
      return steps_rows * 4 * per_cell(in_, hidden_);
    case LstmVariant::FullComplex:
      return steps_rows * 4 * per_cell(in_, hidden_);
  }
  return 0;
}

void LstmLayer::collect(std::vector<Parameter*>& out) {
  for (auto& c : cells_) {
    c.w_in.collect(out);
    c.w_hidden.collect(out);
    c.bias.collect(out);
    if (c.bias_hidden) c.bias_hidden->collect(out);
  }
}

// ---------------------------------------------------------------------------
// Gated linear unit

GluLayer::GluLayer(std::string name, ConvLayer::Kind kind, Domain domain, Gating gating,
                   const ConvOptions& opts, Initializer& init, double magnitude_eps)
    : name_(std::move(name)),
      gating_(gating),
      eps_(magnitude_eps),
      feature_(name_ + ".feature", kind, domain, opts, init),
      gate_(name_ + ".gate", kind, domain, opts, init) {
  const bool real_gate = gating == Gating::RealSigmoid;
  if (real_gate != (domain == Domain::Real)) {
    throw std::invalid_argument("glu '" + name_ + "': gating '" + to_string(gating) +
                                "' is inconsistent with the " + to_string(domain) + " domain");
  }
}

Var GluLayer::forward(Graph& g, const Var& x, std::optional<Shape> target) {
  Var f1 = feature_.forward(g, x, target);
  Var f2 = gate_.forward(g, x, target);
  return mul(f1, activation(f2, ActivationKind::Sigmoid));
}

Var GluLayer::magnitude_gate(const CVar& gate_branch, double eps) {
  Var m = complex_magnitude(gate_branch, eps);
  Var gate = scale(add_scalar(activation(m, ActivationKind::Sigmoid), -0.5), 2.0);
  // sigmoid rounds to exactly 1 for |F| above ~37; keep the gate inside [0, 1)
  return clamp_max(gate, std::nextafter(1.0, 0.0));
}

CVar GluLayer::forward(Graph& g, const CVar& x, std::optional<Shape> target) {
  CVar f1 = feature_.forward(g, x, target);
  CVar f2 = gate_.forward(g, x, target);
  if (gating_ == Gating::Separate) {
    return {mul(f1.re, activation(f2.re, ActivationKind::Sigmoid)),
            mul(f1.im, activation(f2.im, ActivationKind::Sigmoid))};
  }
  return scale_by(f1, magnitude_gate(f2, eps_));
}

std::size_t GluLayer::param_count() const { return feature_.param_count() + gate_.param_count(); }

std::uint64_t GluLayer::mac_count(const Shape& input) const {
  return feature_.mac_count(input) + gate_.mac_count(input);
}

std::uint64_t GluLayer::mac_count(const Shape& input, const Shape& output) const {
  return feature_.mac_count(input, output) + gate_.mac_count(input, output);
}

void GluLayer::collect(std::vector<Parameter*>& out) {
  feature_.collect(out);
  gate_.collect(out);
}

}  // namespace cplx
