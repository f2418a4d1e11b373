#include "cplx/models.hpp"

#include <stdexcept>

namespace cplx {

namespace {

// A feature map in either domain.
struct Feat {
  Domain domain = Domain::Real;
  Var real;
  CVar cplx;

  const Shape& shape() const { return domain == Domain::Real ? real.shape() : cplx.shape(); }
};

Feat real_feat(Var v) { return {Domain::Real, v, {}}; }
Feat complex_feat(CVar v) { return {Domain::Complex, {}, v}; }

// Real <-> complex views share one channel convention: real channels are [re | im].
Feat to_domain(const Feat& x, Domain d) {
  if (x.domain == d) return x;
  if (d == Domain::Real) return real_feat(concat({x.cplx.re, x.cplx.im}, 1));
  const std::size_t c = x.real.dim(1);
  if (c % 2) throw DimensionError("complex view of an odd channel count", x.shape(), {c / 2});
  return complex_feat({slice(x.real, 1, 0, c / 2), slice(x.real, 1, c / 2, c)});
}

/// Channel count after moving a feature map with c channels from domain a to domain b.
std::size_t convert_channels(std::size_t c, Domain from, Domain to) {
  if (from == to) return c;
  return from == Domain::Complex ? 2 * c : c / 2;
}

Feat cat_channels(const Feat& a, const Feat& b) {
  if (a.domain == Domain::Real) return real_feat(concat({a.real, b.real}, 1));
  return complex_feat(cconcat({a.cplx, b.cplx}, 1));
}

Feat activate(const Feat& x, ActivationKind kind) {
  if (x.domain == Domain::Real) return real_feat(activation(x.real, kind));
  return complex_feat(split_activation(x.cplx, kind));
}

template <class L>
Feat run(L& layer, Graph& g, const Feat& x, std::optional<Shape> target = std::nullopt) {
  if (x.domain == Domain::Real) return real_feat(layer.forward(g, x.real, target));
  return complex_feat(layer.forward(g, x.cplx, target));
}

// noisy[B, T, F] -> [B, 2, T, F] real channels or [B, 1, T, F] complex.
Feat spectrum_input(const CVar& noisy, Domain d) {
  const Shape& s = noisy.shape();
  const Shape four{s[0], 1, s[1], s[2]};
  CVar z = creshape(noisy, four);
  if (d == Domain::Complex) return complex_feat(z);
  return real_feat(concat({z.re, z.im}, 1));
}

// Inverse of spectrum_input on the network output.
CVar spectrum_output(const Feat& y) {
  const Shape& s = y.shape();
  const Shape three{s[0], s[2], s[3]};
  if (y.domain == Domain::Complex) return creshape(y.cplx, three);
  return {reshape(slice(y.real, 1, 0, 1), three), reshape(slice(y.real, 1, 1, 2), three)};
}

// [B, C, T, F] <-> [T, B, C*F] for recurrent bottlenecks.
Var to_sequence(const Var& x) {
  const Shape& s = x.shape();
  return reshape(permute(x, {2, 0, 1, 3}), {s[2], s[0], s[1] * s[3]});
}

Var from_sequence(const Var& x, std::size_t channels, std::size_t bins) {
  const Shape& s = x.shape();
  return permute(reshape(x, {s[0], s[1], channels, bins}), {1, 2, 0, 3});
}

CVar to_sequence(const CVar& x) { return {to_sequence(x.re), to_sequence(x.im)}; }
CVar from_sequence(const CVar& x, std::size_t channels, std::size_t bins) {
  return {from_sequence(x.re, channels, bins), from_sequence(x.im, channels, bins)};
}

Gating gating_for(Domain d, Gating complex_gating) {
  return d == Domain::Real ? Gating::RealSigmoid : complex_gating;
}

std::size_t input_channels(Domain d) { return d == Domain::Real ? 2 : 1; }

}  // namespace

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) l->collect(out);
  return out;
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->param_count();
  return n;
}

void Model::add_slot(std::string name, const Layer& layer, Shape input, Shape output,
                     std::size_t time_axis) {
  slots_.push_back({std::move(name), &layer, std::move(input), std::move(output), time_axis});
}

CVar Model::forward(Graph& g, const CVar& noisy) {
  const Shape& s = noisy.shape();
  if (s.size() != 3 || s[2] != spec_.framing.bins()) {
    throw DimensionError("model " + spec_.name + ": expected noisy [B, T, " +
                         std::to_string(spec_.framing.bins()) + "], got " + shape_str(s));
  }
  return apply_output_head(spec_.output, noisy, network(g, noisy));
}

CVar apply_output_head(OutputMode mode, const CVar& noisy, const CVar& net) {
  if (noisy.shape() != net.shape()) throw DimensionError("output head", noisy.shape(), net.shape());
  switch (mode) {
    case OutputMode::Mapping: return net;
    case OutputMode::Masking: return complex_hadamard(noisy, net);
    case OutputMode::PolarMasking: {
      Var mag = complex_magnitude(net, 1e-12);
      Var squash = divide(activation(mag, ActivationKind::Tanh), mag);
      return complex_hadamard(noisy, scale_by(net, squash));
    }
  }
  throw std::logic_error("unreachable output mode");
}

namespace {

class LinearStackModel final : public Model {
 public:
  explicit LinearStackModel(ModelSpec spec) : Model(std::move(spec)) {
    const auto& s = std::get<LinearStackSpec>(spec_.body);
    Initializer init(spec_.seed);
    domain_ = s.domain;
    bins_ = spec_.framing.bins();
    const std::size_t io = domain_ == Domain::Real ? 2 * bins_ : bins_;
    std::vector<std::size_t> widths{io};
    widths.insert(widths.end(), s.hidden.begin(), s.hidden.end());
    widths.push_back(io);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      const std::string name = "fc" + std::to_string(i);
      auto& l = add_layer<LinearLayer>(name, domain_, widths[i], widths[i + 1], s.bias, init);
      layers_fc_.push_back(&l);
      add_slot(name, l, {1, widths[i]}, {1, widths[i + 1]}, 0);
    }
  }

  CVar network(Graph& g, const CVar& noisy) override {
    const std::size_t last = layers_fc_.size() - 1;
    if (domain_ == Domain::Real) {
      Var x = concat({noisy.re, noisy.im}, 2);
      for (std::size_t i = 0; i <= last; ++i) {
        x = layers_fc_[i]->forward(g, x);
        if (i < last) x = activation(x, ActivationKind::ReLU);
      }
      return {slice(x, 2, 0, bins_), slice(x, 2, bins_, 2 * bins_)};
    }
    CVar x = noisy;
    for (std::size_t i = 0; i <= last; ++i) {
      x = layers_fc_[i]->forward(g, x);
      if (i < last) x = split_activation(x, ActivationKind::ReLU);
    }
    return x;
  }

 private:
  Domain domain_ = Domain::Real;
  std::size_t bins_ = 0;
  std::vector<LinearLayer*> layers_fc_;
};

class LstmStackModel final : public Model {
 public:
  explicit LstmStackModel(ModelSpec spec) : Model(std::move(spec)) {
    const auto& s = std::get<LstmStackSpec>(spec_.body);
    Initializer init(spec_.seed);
    variant_ = s.variant;
    bins_ = spec_.framing.bins();
    const bool real = variant_ == LstmVariant::Real;
    const std::size_t io = real ? 2 * bins_ : bins_;
    std::size_t in = io;
    for (std::size_t i = 0; i < s.layers; ++i) {
      const std::string name = "lstm" + std::to_string(i);
      auto& l = add_layer<LstmLayer>(name, variant_, in, s.hidden, init, 1, s.bias);
      lstm_.push_back(&l);
      add_slot(name, l, {1, 1, in}, {1, 1, s.hidden}, 0);
      in = s.hidden;
    }
    out_ = &add_layer<LinearLayer>("fc_out", real ? Domain::Real : Domain::Complex, s.hidden, io,
                                   true, init);
    add_slot("fc_out", *out_, {1, s.hidden}, {1, io}, 0);
  }

  CVar network(Graph& g, const CVar& noisy) override {
    if (variant_ == LstmVariant::Real) {
      Var x = permute(concat({noisy.re, noisy.im}, 2), {1, 0, 2});
      for (auto* l : lstm_) x = l->forward(g, x);
      Var y = permute(out_->forward(g, x), {1, 0, 2});
      return {slice(y, 2, 0, bins_), slice(y, 2, bins_, 2 * bins_)};
    }
    CVar x = cpermute(noisy, {1, 0, 2});
    for (auto* l : lstm_) x = l->forward(g, x);
    return cpermute(out_->forward(g, x), {1, 0, 2});
  }

 private:
  LstmVariant variant_ = LstmVariant::Real;
  std::size_t bins_ = 0;
  std::vector<LstmLayer*> lstm_;
  LinearLayer* out_ = nullptr;
};

class UNetModel final : public Model {
 public:
  explicit UNetModel(ModelSpec spec) : Model(std::move(spec)) {
    const auto& s = std::get<UNetSpec>(spec_.body);
    Initializer init(spec_.seed);
    domain_ = s.domain;
    act_ = s.activation;
    const std::size_t n = s.channels.size();
    std::size_t f = spec_.framing.bins();
    std::size_t c_in = input_channels(domain_);
    for (std::size_t i = 0; i < n; ++i) {
      ConvOptions o{c_in, s.channels[i], geometry(s, i), true};
      const std::string name = "enc" + std::to_string(i);
      auto& l = add_layer<ConvLayer>(name, ConvLayer::Kind::Forward, domain_, o, init);
      const Shape in{1, c_in, 1, f};
      const Shape out = l.output_shape(in);
      add_slot(name, l, in, out, 2);
      enc_.push_back(&l);
      enc_f_.push_back(f);
      f = out[3];
      c_in = s.channels[i];
    }
    dec_.resize(n);
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t in_c = k == n - 1 ? s.channels[k] : 2 * s.channels[k];
      const std::size_t out_c = k > 0 ? s.channels[k - 1] : input_channels(domain_);
      ConvOptions o{in_c, out_c, geometry(s, k), true};
      const std::string name = "dec" + std::to_string(k);
      auto& l = add_layer<ConvLayer>(name, ConvLayer::Kind::Transposed, domain_, o, init);
      const Shape in{1, in_c, 1, f};
      const Shape out = l.output_shape(in, Shape{1, enc_f_[k]});
      add_slot(name, l, in, out, 2);
      dec_[k] = &l;
      f = enc_f_[k];
    }
  }

  CVar network(Graph& g, const CVar& noisy) override {
    Feat x = spectrum_input(noisy, domain_);
    const std::size_t frames = noisy.shape()[1];
    std::vector<Feat> skips;
    for (auto* l : enc_) {
      x = activate(run(*l, g, x), act_);
      skips.push_back(x);
    }
    const std::size_t n = enc_.size();
    for (std::size_t k = n; k-- > 0;) {
      if (k != n - 1) x = cat_channels(x, skips[k]);
      x = run(*dec_[k], g, x, Shape{frames, enc_f_[k]});
      if (k > 0) x = activate(x, act_);
    }
    return spectrum_output(x);
  }

 private:
  static ConvGeometry geometry(const UNetSpec& s, std::size_t i) {
    ConvGeometry g;
    g.kernel_t = s.kernel_t[i];
    g.kernel_f = s.kernel_f[i];
    g.stride_f = s.stride_f[i];
    g.pad_t_begin = g.pad_t_end = s.kernel_t[i] / 2;
    g.pad_f_begin = g.pad_f_end = s.kernel_f[i] / 2;
    return g;
  }

  Domain domain_ = Domain::Real;
  ActivationKind act_ = ActivationKind::ELU;
  std::vector<ConvLayer*> enc_, dec_;
  std::vector<std::size_t> enc_f_;
};

class GcrnModel final : public Model {
 public:
  explicit GcrnModel(ModelSpec spec) : Model(std::move(spec)) {
    s_ = std::get<GcrnSpec>(spec_.body);
    Initializer init(spec_.seed);
    const auto enc_plan = s_.plan(s_.encoder);
    const auto dec_plan = s_.plan(s_.decoder);
    const std::size_t n = enc_plan.size();
    bins_ = spec_.framing.bins();

    ConvGeometry geo;
    geo.kernel_f = s_.kernel_f;
    geo.stride_f = 2;

    std::size_t f = bins_;
    std::size_t c_in = input_channels(s_.encoder);
    for (std::size_t i = 0; i < n; ++i) {
      ConvOptions o{c_in, enc_plan[i], geo, true};
      const std::string name = "enc" + std::to_string(i);
      auto& l = add_layer<GluLayer>(name, ConvLayer::Kind::Forward, s_.encoder,
                                    gating_for(s_.encoder, s_.gating), o, init);
      const Shape in{1, c_in, 1, f};
      const Shape out = l.output_shape(in);
      add_slot(name, l, in, out, 2);
      enc_.push_back(&l);
      enc_f_.push_back(f);
      f = out[3];
      c_in = enc_plan[i];
    }
    bottleneck_bins_ = f;

    const Domain lstm_domain =
        s_.bottleneck == LstmVariant::Real ? Domain::Real : Domain::Complex;
    bottleneck_channels_ = convert_channels(enc_plan.back(), s_.encoder, lstm_domain);
    const std::size_t width = bottleneck_channels_ * f;
    for (std::size_t i = 0; i < s_.lstm_layers; ++i) {
      const std::string name = "lstm" + std::to_string(i);
      const std::size_t groups = s_.bottleneck == LstmVariant::Real ? s_.lstm_groups : 1;
      auto& l = add_layer<LstmLayer>(name, s_.bottleneck, width, width, init, groups, s_.lstm_bias);
      add_slot(name, l, {1, 1, width}, {1, 1, width}, 0);
      lstm_.push_back(&l);
    }

    std::size_t prev_c = convert_channels(bottleneck_channels_, lstm_domain, s_.decoder);
    dec_.resize(n);
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t skip_c = convert_channels(enc_plan[k], s_.encoder, s_.decoder);
      const std::size_t in_c = prev_c + skip_c;
      const std::size_t out_c = k > 0 ? dec_plan[k - 1] : input_channels(s_.decoder);
      ConvOptions o{in_c, out_c, geo, true};
      const std::string name = "dec" + std::to_string(k);
      auto& l = add_layer<GluLayer>(name, ConvLayer::Kind::Transposed, s_.decoder,
                                    gating_for(s_.decoder, s_.gating), o, init);
      const Shape in{1, in_c, 1, f};
      const Shape out = l.output_shape(in, Shape{1, enc_f_[k]});
      add_slot(name, l, in, out, 2);
      dec_[k] = &l;
      f = enc_f_[k];
      prev_c = out_c;
    }

    if (s_.decoder == Domain::Real) {
      for (const char* part : {"fc_re", "fc_im"}) {
        auto& l = add_layer<LinearLayer>(part, Domain::Real, bins_, bins_, true, init);
        add_slot(part, l, {1, bins_}, {1, bins_}, 0);
        head_.push_back(&l);
      }
    } else {
      auto& l = add_layer<LinearLayer>("fc", Domain::Complex, bins_, bins_, true, init);
      add_slot("fc", l, {1, bins_}, {1, bins_}, 0);
      head_.push_back(&l);
    }
  }

  CVar network(Graph& g, const CVar& noisy) override {
    const std::size_t frames = noisy.shape()[1];
    Feat x = spectrum_input(noisy, s_.encoder);
    std::vector<Feat> skips;
    for (auto* l : enc_) {
      x = activate(run(*l, g, x), ActivationKind::ELU);
      skips.push_back(x);
    }

    if (s_.bottleneck == LstmVariant::Real) {
      Var seq = to_sequence(to_domain(x, Domain::Real).real);
      for (auto* l : lstm_) seq = l->forward(g, seq);
      x = real_feat(from_sequence(seq, bottleneck_channels_, bottleneck_bins_));
    } else {
      CVar seq = to_sequence(to_domain(x, Domain::Complex).cplx);
      for (auto* l : lstm_) seq = l->forward(g, seq);
      x = complex_feat(from_sequence(seq, bottleneck_channels_, bottleneck_bins_));
    }

    x = to_domain(x, s_.decoder);
    for (std::size_t k = dec_.size(); k-- > 0;) {
      x = cat_channels(x, to_domain(skips[k], s_.decoder));
      x = run(*dec_[k], g, x, Shape{frames, enc_f_[k]});
      if (k > 0) x = activate(x, ActivationKind::ELU);
    }

    CVar spec = spectrum_output(x);
    if (s_.decoder == Domain::Real) {
      return {head_[0]->forward(g, spec.re), head_[1]->forward(g, spec.im)};
    }
    return head_[0]->forward(g, spec);
  }

 private:
  GcrnSpec s_;
  std::size_t bins_ = 0, bottleneck_bins_ = 0, bottleneck_channels_ = 0;
  std::vector<GluLayer*> enc_, dec_;
  std::vector<LstmLayer*> lstm_;
  std::vector<LinearLayer*> head_;
  std::vector<std::size_t> enc_f_;
};

class DccrnModel final : public Model {
 public:
  explicit DccrnModel(ModelSpec spec) : Model(std::move(spec)) {
    s_ = std::get<DccrnSpec>(spec_.body);
    Initializer init(spec_.seed);
    const bool cplx = s_.domain == Domain::Complex;
    const std::size_t per = cplx ? 2 : 1;
    const std::size_t n = s_.channels.size();

    ConvGeometry geo;
    geo.kernel_t = s_.kernel_t;
    geo.kernel_f = s_.kernel_f;
    geo.stride_f = 2;
    geo.pad_t_begin = s_.kernel_t - 1;  // causal in time
    geo.pad_f_begin = geo.pad_f_end = s_.kernel_f / 2;

    std::size_t f = spec_.framing.bins() - 1;  // the DC bin is not modelled
    std::size_t c_in = input_channels(s_.domain);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c_out = s_.channels[i] / per;
      ConvOptions o{c_in, c_out, geo, true};
      const std::string name = "enc" + std::to_string(i);
      auto& l = add_layer<ConvLayer>(name, ConvLayer::Kind::Forward, s_.domain, o, init);
      const Shape in{1, c_in, 1, f};
      const Shape out = l.output_shape(in);
      add_slot(name, l, in, out, 2);
      enc_.push_back(&l);
      enc_f_.push_back(f);
      f = out[3];
      c_in = c_out;
    }
    bottleneck_bins_ = f;
    bottleneck_channels_ = c_in;

    const std::size_t width = c_in * f;
    const std::size_t hidden = s_.lstm_hidden / per;
    const LstmVariant variant = cplx ? LstmVariant::QuasiComplex : LstmVariant::Real;
    std::size_t in = width;
    for (std::size_t i = 0; i < s_.lstm_layers; ++i) {
      const std::string name = "lstm" + std::to_string(i);
      auto& l = add_layer<LstmLayer>(name, variant, in, hidden, init, 1, s_.lstm_bias);
      add_slot(name, l, {1, 1, in}, {1, 1, hidden}, 0);
      lstm_.push_back(&l);
      in = hidden;
    }
    proj_ = &add_layer<LinearLayer>("fc_proj", s_.domain, hidden, width, true, init);
    add_slot("fc_proj", *proj_, {1, 1, hidden}, {1, 1, width}, 0);

    std::size_t prev_c = c_in;
    dec_.resize(n);
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t in_c = prev_c + s_.channels[k] / per;
      const std::size_t out_c = k > 0 ? s_.channels[k - 1] / per : input_channels(s_.domain);
      ConvOptions o{in_c, out_c, geo, true};
      const std::string name = "dec" + std::to_string(k);
      auto& l = add_layer<ConvLayer>(name, ConvLayer::Kind::Transposed, s_.domain, o, init);
      const Shape in_shape{1, in_c, 1, f};
      const Shape out = l.output_shape(in_shape, Shape{1, enc_f_[k]});
      add_slot(name, l, in_shape, out, 2);
      dec_[k] = &l;
      f = enc_f_[k];
      prev_c = out_c;
    }
  }

  CVar network(Graph& g, const CVar& noisy) override {
    const Shape& s = noisy.shape();
    const std::size_t frames = s[1];
    Feat x = spectrum_input(cslice(noisy, 2, 1, s[2]), s_.domain);
    std::vector<Feat> skips;
    for (auto* l : enc_) {
      x = activate(run(*l, g, x), ActivationKind::ELU);
      skips.push_back(x);
    }
    if (s_.domain == Domain::Real) {
      Var seq = to_sequence(x.real);
      for (auto* l : lstm_) seq = l->forward(g, seq);
      x = real_feat(from_sequence(proj_->forward(g, seq), bottleneck_channels_, bottleneck_bins_));
    } else {
      CVar seq = to_sequence(x.cplx);
      for (auto* l : lstm_) seq = l->forward(g, seq);
      x = complex_feat(
          from_sequence(proj_->forward(g, seq), bottleneck_channels_, bottleneck_bins_));
    }
    for (std::size_t k = dec_.size(); k-- > 0;) {
      x = cat_channels(x, skips[k]);
      x = run(*dec_[k], g, x, Shape{frames, enc_f_[k]});
      if (k > 0) x = activate(x, ActivationKind::ELU);
    }
    CVar mask = spectrum_output(x);
    Var dc = g.constant(Tensor({s[0], s[1], 1}));
    return {concat({dc, mask.re}, 2), concat({dc, mask.im}, 2)};
  }

 private:
  DccrnSpec s_;
  std::size_t bottleneck_bins_ = 0, bottleneck_channels_ = 0;
  std::vector<ConvLayer*> enc_, dec_;
  std::vector<LstmLayer*> lstm_;
  LinearLayer* proj_ = nullptr;
  std::vector<std::size_t> enc_f_;
};

}  // namespace

std::unique_ptr<Model> build_model(const ModelSpec& spec) {
  spec.validate();
  switch (spec.family()) {
    case Family::LinearStack: return std::make_unique<LinearStackModel>(spec);
    case Family::LstmStack: return std::make_unique<LstmStackModel>(spec);
    case Family::UNet: return std::make_unique<UNetModel>(spec);
    case Family::Gcrn: return std::make_unique<GcrnModel>(spec);
    case Family::Dccrn: return std::make_unique<DccrnModel>(spec);
  }
  throw std::logic_error("unreachable family");
}

ModelSpec linear_stack_spec(Domain domain, const Framing& framing) {
  ModelSpec spec;
  spec.name = domain == Domain::Complex ? "c_linear" : "r_linear";
  spec.framing = framing;
  LinearStackSpec body;
  body.domain = domain;
  body.hidden = domain == Domain::Complex ? std::vector<std::size_t>{406, 406}
                                          : std::vector<std::size_t>{512, 512};
  spec.body = body;
  return spec;
}

ModelSpec lstm_stack_spec(LstmVariant variant, const Framing& framing) {
  ModelSpec spec;
  spec.framing = framing;
  LstmStackSpec body;
  body.variant = variant;
  switch (variant) {
    case LstmVariant::Real:
      spec.name = "lstm";
      body.hidden = 1024;
      body.bias = LstmBias::PerGate;
      break;
    case LstmVariant::QuasiComplex:
      spec.name = "quasi_c_lstm";
      body.hidden = 732;
      body.bias = LstmBias::InputAndHidden;
      break;
    case LstmVariant::FullComplex:
      spec.name = "c_lstm";
      body.hidden = 732;
      body.bias = LstmBias::InputAndHidden;
      break;
  }
  spec.body = body;
  return spec;
}

std::unique_ptr<Model> build_linear_stack(Domain domain) {
  return build_model(linear_stack_spec(domain));
}

std::unique_ptr<Model> build_lstm_stack(LstmVariant variant) {
  return build_model(lstm_stack_spec(variant));
}

std::unique_ptr<Model> build_unet(const UNetSpec& body, const Framing& framing) {
  ModelSpec spec;
  spec.name = body.domain == Domain::Complex ? "dcunet" : "runet";
  spec.framing = framing;
  spec.body = body;
  return build_model(spec);
}

std::unique_ptr<Model> build_gcrn(const GcrnSpec& body, OutputMode output,
                                  const Framing& framing) {
  ModelSpec spec;
  spec.name = "gcrn";
  spec.framing = framing;
  spec.output = output;
  spec.body = body;
  return build_model(spec);
}

std::unique_ptr<Model> build_dccrn(const DccrnSpec& body, const Framing& framing) {
  ModelSpec spec;
  spec.name = body.domain == Domain::Complex ? "dccrn" : "dccrn_real";
  spec.framing = framing;
  spec.output = OutputMode::PolarMasking;
  spec.body = body;
  return build_model(spec);
}

Spectrogram model_forward(Model& model, const Spectrogram& noisy) {
  if (!(noisy.framing == model.framing())) {
    throw std::invalid_argument("model " + model.spec().name + ": spectrogram framing " +
                                std::to_string(noisy.framing.window_len) + "/" +
                                std::to_string(noisy.framing.hop) + " does not match model framing " +
                                std::to_string(model.framing().window_len) + "/" +
                                std::to_string(model.framing().hop));
  }
  const std::size_t frames = noisy.frames();
  const std::size_t bins = noisy.framing.bins();
  Graph g(false);
  CVar x = g.constant(ComplexPair(noisy.bins.re.reshaped({1, frames, bins}),
                                  noisy.bins.im.reshaped({1, frames, bins})));
  CVar y = model.forward(g, x);
  Spectrogram out;
  out.bins = ComplexPair(y.re.value().reshaped({frames, bins}), y.im.value().reshaped({frames, bins}));
  out.framing = noisy.framing;
  out.length = noisy.length;
  return out;
}

}  // namespace cplx
