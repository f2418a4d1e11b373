// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [artifact-dir] [--only N,M,...]
#include "cplx/accounting.hpp"
#include "cplx/dsp.hpp"
#include "cplx/presets.hpp"
#include "cplx/train.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

using namespace cplx;
using namespace cplx::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

bool within(double value, double target, double rel) {
  return std::fabs(value - target) <= rel * std::fabs(target);
}

// 1. Table-1 parameter counts at printed precision.
Outcome c1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::pair<const char*, const char*> rows[] = {{"c_lstm", "23.35 M"},
                                                      {"quasi_c_lstm", "23.35 M"},
                                                      {"lstm", "23.62 M"},
                                                      {"c_linear", "0.59 M"},
                                                      {"r_linear", "0.59 M"}};
  for (const auto& [name, printed] : rows) {
    const auto r = count_params(*build_model(preset_spec(name)));
    const std::string got = format_millions(r.params);
    o.require(got == printed, std::string(name) + " " + got + " != " + printed);
    o.note(std::string(name) + "=" + got);
  }
  const double s = seconds_since(t0);
  o.note("runtime " + num(s) + " s");
  o.require(s < 1.0, "over the 1 s budget");
  return o;
}

// 2. Table-1 MACs within 2% on a 1-second signal.
Outcome c2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::tuple<const char*, double, std::size_t> rows[] = {{"quasi_c_lstm", 5.90e9, 126},
                                                               {"lstm", 2.98e9, 126},
                                                               {"c_linear", 119.59e6, 101},
                                                               {"r_linear", 59.88e6, 101}};
  for (const auto& [name, printed, frames] : rows) {
    const auto r = count_macs(*build_model(preset_spec(name)), 1.0);
    const double err = static_cast<double>(r.macs) / printed - 1.0;
    o.require(r.frames == frames, std::string(name) + " frames " + std::to_string(r.frames));
    o.require(std::fabs(err) <= 0.02, std::string(name) + " off by " + num(100 * err, 2) + "%");
    o.note(std::string(name) + "=" + format_macs(r.macs) + " (" + num(100 * err, 2) + "%)");
  }
  const double s = seconds_since(t0);
  o.note("runtime " + num(s) + " s");
  o.require(s < 1.0, "over the 1 s budget");
  return o;
}

// 3. Table-5 DCCRN pair and Table-2 GCRN presets.
Outcome c3() {
  Outcome o;
  const auto cx = count_macs(*build_model(preset_spec("dccrn")));
  const auto re = count_macs(*build_model(preset_spec("dccrn_real")));
  const double pc = static_cast<double>(cx.params), pr = static_cast<double>(re.params);
  o.require(std::fabs(pc - pr) <= 0.01 * std::max(pc, pr), "dccrn pair params differ by > 1%");
  o.require(within(pc, 3.67e6, 0.05), "dccrn params " + format_millions(cx.params));
  o.require(within(pr, 3.64e6, 0.05), "dccrn_real params " + format_millions(re.params));
  const double ratio = static_cast<double>(cx.macs) / static_cast<double>(re.macs);
  o.require(ratio >= 2.5 && ratio <= 3.5, "dccrn MAC ratio " + num(ratio));
  o.note("dccrn " + format_millions(cx.params) + "/" + format_macs(cx.macs) + ", real " +
         format_millions(re.params) + "/" + format_macs(re.macs) + ", ratio " + num(ratio, 2));

  const auto a = count_macs(*build_model(preset_spec("gcrn_2a")));
  const auto b = count_macs(*build_model(preset_spec("gcrn_2b")));
  o.require(within(static_cast<double>(a.params), 9.25e6, 0.05), "gcrn_2a params " + format_millions(a.params));
  o.require(within(static_cast<double>(a.macs), 1.72e9, 0.05), "gcrn_2a MACs " + format_macs(a.macs));
  o.require(a.params == b.params, "quasi bottleneck changed the parameter count");
  const double g = static_cast<double>(b.macs) / static_cast<double>(a.macs);
  o.require(g >= 1.3 && g <= 1.7, "quasi bottleneck MAC factor " + num(g));
  o.note("gcrn_2a " + format_millions(a.params) + "/" + format_macs(a.macs) + ", +quasi x" + num(g, 3));
  return o;
}

// Real layer weights that act on [re | im] stacked inputs exactly like a complex weight.
void block_linear(LinearLayer& real, LinearLayer& cx) {
  const std::size_t in = cx.in_features(), out = cx.out_features();
  const Tensor& wr = cx.weight().re.value();
  const Tensor& wi = cx.weight().im->value();
  Tensor& w = real.weight().re.value();
  const std::size_t cols = 2 * out;
  for (std::size_t i = 0; i < in; ++i) {
    for (std::size_t j = 0; j < out; ++j) {
      const double r = wr[i * out + j], m = wi[i * out + j];
      w[i * cols + j] = r;
      w[(in + i) * cols + j] = -m;
      w[i * cols + out + j] = m;
      w[(in + i) * cols + out + j] = r;
    }
  }
  Tensor& b = real.bias()->re.value();
  for (std::size_t j = 0; j < out; ++j) {
    b[j] = cx.bias()->re.value()[j];
    b[out + j] = cx.bias()->im->value()[j];
  }
}

// Forward conv weights are [Co, Ci, k]; transposed ones are [Ci, Co, k].
void block_conv(ConvLayer& real, ConvLayer& cx) {
  const auto& g = cx.options().geometry;
  const std::size_t k = g.kernel_t * g.kernel_f;
  const bool tr = cx.kind() == ConvLayer::Kind::Transposed;
  const std::size_t ci = cx.options().in_channels, co = cx.options().out_channels;
  const std::size_t d0 = tr ? ci : co, d1 = tr ? co : ci;
  const Tensor& wr = cx.kernel().re.value();
  const Tensor& wi = cx.kernel().im->value();
  Tensor& w = real.kernel().re.value();
  auto at = [&](std::size_t a, std::size_t b, std::size_t n) { return (a * 2 * d1 + b) * k + n; };
  for (std::size_t a = 0; a < d0; ++a) {
    for (std::size_t b = 0; b < d1; ++b) {
      for (std::size_t n = 0; n < k; ++n) {
        const double r = wr[(a * d1 + b) * k + n], m = wi[(a * d1 + b) * k + n];
        // rows are outputs for forward kernels, inputs for transposed ones
        const std::size_t a_im = d0 + a, b_im = d1 + b;
        w[at(a, b, n)] = r;
        w[at(a_im, b_im, n)] = r;
        if (!tr) {
          w[at(a, b_im, n)] = -m;  // re out <- im in
          w[at(a_im, b, n)] = m;   // im out <- re in
        } else {
          w[at(a_im, b, n)] = -m;  // im in -> re out
          w[at(a, b_im, n)] = m;   // re in -> im out
        }
      }
    }
  }
  Tensor& bias = real.bias()->re.value();
  for (std::size_t j = 0; j < co; ++j) {
    bias[j] = cx.bias()->re.value()[j];
    bias[co + j] = cx.bias()->im->value()[j];
  }
}

// 4. Complex layers equal their block-structured real counterparts.
Outcome c4() {
  Outcome o;
  std::mt19937_64 rng(404);
  auto pick = [&rng](std::size_t lo, std::size_t hi) { return lo + rng() % (hi - lo + 1); };
  double worst[3] = {0, 0, 0};
  for (int trial = 0; trial < 100; ++trial) {
    Initializer init(1000 + trial);
    {
      const std::size_t in = pick(1, 9), out = pick(1, 9), b = pick(1, 4);
      LinearLayer cx("c", Domain::Complex, in, out, true, init);
      LinearLayer re("r", Domain::Real, 2 * in, 2 * out, true, init);
      block_linear(re, cx);
      const ComplexPair x = random_complex({b, in}, rng);
      Graph g(false);
      CVar y = cx.forward(g, g.constant(x));
      Var yr = re.forward(g, concat({g.constant(x.re), g.constant(x.im)}, 1));
      worst[0] = std::max({worst[0], max_abs_diff(y.re.value(), slice(yr, 1, 0, out).value()),
                           max_abs_diff(y.im.value(), slice(yr, 1, out, 2 * out).value())});
    }
    for (int kind = 0; kind < 2; ++kind) {
      ConvOptions opt;
      opt.in_channels = pick(1, 4);
      opt.out_channels = pick(1, 4);
      auto& geo = opt.geometry;
      geo.kernel_t = pick(1, 3);
      geo.kernel_f = pick(1, 4);
      geo.stride_t = pick(1, 2);
      geo.stride_f = pick(1, 3);
      geo.pad_t_begin = pick(0, geo.kernel_t - 1);
      geo.pad_t_end = pick(0, geo.kernel_t - 1);
      geo.pad_f_begin = pick(0, geo.kernel_f - 1);
      geo.pad_f_end = pick(0, geo.kernel_f - 1);
      const auto k = kind ? ConvLayer::Kind::Transposed : ConvLayer::Kind::Forward;
      ConvLayer cx("c", k, Domain::Complex, opt, init);
      ConvOptions ropt = opt;
      ropt.in_channels *= 2;
      ropt.out_channels *= 2;
      ConvLayer re("r", k, Domain::Real, ropt, init);
      block_conv(re, cx);
      const std::size_t b = pick(1, 2), t = pick(3, 6), f = pick(4, 9);
      const ComplexPair x = random_complex({b, opt.in_channels, t, f}, rng);
      Graph g(false);
      CVar y = cx.forward(g, g.constant(x));
      Var yr = re.forward(g, concat({g.constant(x.re), g.constant(x.im)}, 1));
      const std::size_t co = opt.out_channels;
      worst[1 + kind] = std::max({worst[1 + kind],
                                  max_abs_diff(y.re.value(), slice(yr, 1, 0, co).value()),
                                  max_abs_diff(y.im.value(), slice(yr, 1, co, 2 * co).value())});
    }
  }
  const char* names[3] = {"linear", "conv", "deconv"};
  for (int i = 0; i < 3; ++i) {
    o.require(worst[i] <= 1e-12, std::string(names[i]) + " max error " + num(worst[i] * 1e12, 3) + "e-12");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s max |diff| %.1e", names[i], worst[i]);
    o.note(buf);
  }
  o.note("100 instances each");
  return o;
}

// 5. Finite-difference gradient checks for every layer kind and loss.
struct GradCase {
  std::string name;
  std::function<double(std::uint64_t)> run;  // returns the worst relative error for a seed
};

template <class L, class X>
double layer_case(L& layer, X input, std::uint64_t seed,
                  std::optional<Shape> target = std::nullopt) {
  std::vector<Parameter*> params;
  layer.collect(params);
  Parameter xr("x.re", input.re);
  Parameter xi("x.im", input.im);
  params.push_back(&xr);
  if constexpr (std::is_same_v<X, ComplexPair>) params.push_back(&xi);
  return gradcheck(params, [&](Graph& g) {
    Probe probe(seed);
    if constexpr (std::is_same_v<X, ComplexPair>) {
      CVar x{g.param(xr), g.param(xi)};
      if constexpr (std::is_same_v<L, LinearLayer> || std::is_same_v<L, LstmLayer>) {
        return probe(layer.forward(g, x));
      } else {
        return probe(layer.forward(g, x, target));
      }
    } else {
      Var x = g.param(xr);
      if constexpr (std::is_same_v<L, LinearLayer> || std::is_same_v<L, LstmLayer>) {
        return probe(layer.forward(g, x));
      } else {
        return probe(layer.forward(g, x, target));
      }
    }
  });
}

struct RealInput {
  Tensor re, im;
};

std::vector<GradCase> grad_cases() {
  std::vector<GradCase> cases;
  auto complex_in = [](Shape s, std::mt19937_64& rng) { return random_complex(s, rng); };
  auto real_in = [](Shape s, std::mt19937_64& rng) { return RealInput{random_tensor(s, rng), {}}; };

  for (Domain d : {Domain::Real, Domain::Complex}) {
    cases.push_back({"linear/" + to_string(d), [=](std::uint64_t seed) {
                       std::mt19937_64 rng(seed);
                       Initializer init(seed);
                       LinearLayer l("fc", d, 3, 4, true, init);
                       if (d == Domain::Real) return layer_case(l, real_in({2, 3}, rng), seed);
                       return layer_case(l, complex_in({2, 3}, rng), seed);
                     }});
    for (auto kind : {ConvLayer::Kind::Forward, ConvLayer::Kind::Transposed}) {
      const std::string kn = kind == ConvLayer::Kind::Forward ? "conv/" : "deconv/";
      cases.push_back({kn + to_string(d), [=](std::uint64_t seed) {
                         std::mt19937_64 rng(seed);
                         Initializer init(seed);
                         ConvOptions opt{2, 2, {}, true};
                         opt.geometry.kernel_t = 2;
                         opt.geometry.kernel_f = 3;
                         opt.geometry.stride_f = 2;
                         opt.geometry.pad_f_begin = 1;
                         opt.geometry.pad_t_begin = 1;
                         ConvLayer l("conv", kind, d, opt, init);
                         const Shape s{2, 2, 3, 5};
                         if (d == Domain::Real) return layer_case(l, real_in(s, rng), seed);
                         return layer_case(l, complex_in(s, rng), seed);
                       }});
    }
  }
  const std::pair<Domain, Gating> glus[] = {{Domain::Real, Gating::RealSigmoid},
                                            {Domain::Complex, Gating::Separate},
                                            {Domain::Complex, Gating::Magnitude}};
  for (auto [d, gating] : glus) {
    for (auto kind : {ConvLayer::Kind::Forward, ConvLayer::Kind::Transposed}) {
      const std::string kn = kind == ConvLayer::Kind::Forward ? "" : "/transposed";
      cases.push_back({"glu/" + to_string(gating) + kn, [=](std::uint64_t seed) {
                         std::mt19937_64 rng(seed);
                         Initializer init(seed);
                         ConvOptions opt{2, 2, {}, true};
                         opt.geometry.kernel_f = 3;
                         opt.geometry.stride_f = 2;
                         GluLayer l("glu", kind, d, gating, opt, init);
                         const Shape s{1, 2, 2, 7};
                         if (d == Domain::Real) return layer_case(l, real_in(s, rng), seed);
                         return layer_case(l, complex_in(s, rng), seed);
                       }});
    }
  }
  const std::tuple<LstmVariant, std::size_t, LstmBias> lstms[] = {
      {LstmVariant::Real, 1, LstmBias::PerGate},
      {LstmVariant::Real, 2, LstmBias::InputAndHidden},
      {LstmVariant::QuasiComplex, 1, LstmBias::PerGate},
      {LstmVariant::QuasiComplex, 1, LstmBias::InputAndHidden},
      {LstmVariant::FullComplex, 1, LstmBias::PerGate},
      {LstmVariant::FullComplex, 1, LstmBias::InputAndHidden}};
  for (auto [v, groups, bias] : lstms) {
    cases.push_back({"lstm/" + to_string(v) + "/g" + std::to_string(groups) + "/" + to_string(bias),
                     [=](std::uint64_t seed) {
                       std::mt19937_64 rng(seed);
                       Initializer init(seed);
                       LstmLayer l("lstm", v, 4, 4, init, groups, bias);
                       const Shape s{3, 2, 4};
                       if (v == LstmVariant::Real) return layer_case(l, real_in(s, rng), seed);
                       return layer_case(l, complex_in(s, rng), seed);
                     }});
  }

  const Framing small{16000, 32, 8};
  for (LossKind k : {LossKind::SiSdr, LossKind::L1Spec, LossKind::MseSpec}) {
    cases.push_back({"loss/" + to_string(k), [=](std::uint64_t seed) {
                       std::mt19937_64 rng(seed);
                       const std::size_t len = 64, frames = small.frames(len);
                       const Shape s{2, frames, small.bins()};
                       Parameter er("est.re", random_tensor(s, rng));
                       Parameter ei("est.im", random_tensor(s, rng));
                       const ComplexPair ref = random_complex(s, rng);
                       const Tensor waves = random_tensor({2, len}, rng);
                       return gradcheck({&er, &ei}, [&](Graph& g) {
                         CVar est{g.param(er), g.param(ei)};
                         switch (k) {
                           case LossKind::SiSdr: return loss_sisdr(g, est, waves, small);
                           case LossKind::L1Spec: return loss_l1_spec(g, est, ref);
                           case LossKind::MseSpec: return loss_mse_spec(g, est, ref);
                         }
                         throw std::logic_error("loss");
                       });
                     }});
  }
  return cases;
}

Outcome c5() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  const auto cases = grad_cases();
  for (const auto& c : cases) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const double e = c.run(seed);
      if (e > worst) {
        worst = e;
        worst_name = c.name;
      }
      o.require(e < 1e-4, c.name + " seed " + std::to_string(seed) + " rel err " + std::to_string(e));
    }
  }
  const double s = seconds_since(t0);
  o.require(s < 120.0, "runtime " + num(s, 1) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu cases x 10 seeds, worst rel err %.2e (%s), %.1f s",
                cases.size(), worst, worst_name.c_str(), s);
  o.note(buf);
  return o;
}

// 6. Magnitude gate range, zero at the origin, phase preservation.
Outcome c6() {
  Outcome o;
  std::mt19937_64 rng(6);
  double lo = 1.0, hi = 0.0, phase = 0.0;
  std::size_t checked = 0;
  for (double scale : {1e-8, 1e-3, 1.0, 10.0, 50.0, 1e3, 1e8}) {
    Initializer init(static_cast<std::uint64_t>(scale * 7) + 1);
    ConvOptions opt{2, 3, {}, true};
    opt.geometry.kernel_f = 3;
    GluLayer glu("glu", ConvLayer::Kind::Forward, Domain::Complex, Gating::Magnitude, opt, init);
    ComplexPair x = random_complex({2, 2, 3, 8}, rng);
    for (auto& v : x.re.data()) v *= scale;
    for (auto& v : x.im.data()) v *= scale;
    Graph g(false);
    CVar xv = g.constant(x);
    CVar f1 = glu.feature_branch().forward(g, xv);
    CVar f2 = glu.gate_branch().forward(g, xv);
    const Tensor gate = GluLayer::magnitude_gate(f2, 0.0).value();
    CVar y = glu.forward(g, xv);
    for (std::size_t i = 0; i < gate.size(); ++i) {
      lo = std::min(lo, gate[i]);
      hi = std::max(hi, gate[i]);
      if (gate[i] > 0.0) {
        const double re = f1.re.value()[i], im = f1.im.value()[i];
        const double lhs = re * y.im.value()[i], rhs = im * y.re.value()[i];
        phase = std::max(phase, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs)));
        ++checked;
      }
    }
  }
  Graph g(false);
  const ComplexPair zero(Tensor({4, 4}), Tensor({4, 4}));
  const Tensor at_zero = GluLayer::magnitude_gate(g.constant(zero), 0.0).value();
  bool exact_zero = true;
  for (double v : at_zero.data()) exact_zero = exact_zero && v == 0.0;
  o.require(lo >= 0.0 && hi < 1.0, "gate range [" + num(lo, 17) + ", " + num(hi, 17) + "]");
  o.require(exact_zero, "gate(0) != 0");
  o.require(phase <= 1e-12, "phase identity error " + std::to_string(phase));
  char buf[160];
  std::snprintf(buf, sizeof buf, "gate in [%.3g, 1 - %.3g], gate(0) = 0, phase error %.1e over %zu points",
                lo, 1.0 - hi, phase, checked);
  o.note(buf);
  return o;
}

// 7. Quasi and full complex LSTMs have identical parameter counts.
Outcome c7() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::size_t cases = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::size_t in = 1 + rng() % 2048, h = 1 + rng() % 2048;
    for (LstmBias b : {LstmBias::PerGate, LstmBias::InputAndHidden}) {
      const auto q = LstmLayer::count_params(LstmVariant::QuasiComplex, in, h, 1, b);
      const auto f = LstmLayer::count_params(LstmVariant::FullComplex, in, h, 1, b);
      o.require(q == f, "in " + std::to_string(in) + " h " + std::to_string(h));
      ++cases;
    }
  }
  for (int i = 0; i < 50; ++i) {
    const std::size_t in = 1 + rng() % 24, h = 1 + rng() % 24;
    Initializer init(i);
    LstmLayer q("q", LstmVariant::QuasiComplex, in, h, init);
    LstmLayer f("f", LstmVariant::FullComplex, in, h, init);
    o.require(q.param_count() == f.param_count(), "built layers differ");
    ++cases;
  }
  o.note(std::to_string(cases) + " random (in, hidden, bias) cases");
  return o;
}

// 8. STFT round trip, SI-SDR scale invariance, mixing accuracy.
Outcome c8() {
  Outcome o;
  std::mt19937_64 rng(8);
  double rt = 0.0;
  for (Framing f : {Framing{16000, 512, 128}, Framing{16000, 320, 160}}) {
    for (int i = 0; i < 5; ++i) {
      const std::size_t len = 4000 + rng() % 4000;
      const Tensor x = random_tensor({len}, rng);
      const auto y = istft(stft(x.data(), f));
      for (std::size_t n = 0; n < len; ++n) rt = std::max(rt, std::fabs(y[n] - x[n]));
    }
  }
  o.require(rt < 1e-10, "STFT round trip error " + std::to_string(rt));

  bool exact = true;
  double drift = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Tensor r = random_tensor({1000}, rng);
    Tensor e = random_tensor({1000}, rng);
    for (std::size_t n = 0; n < 1000; ++n) e[n] += r[n];
    const double base = si_sdr(e.data(), r.data());
    for (double a : {2.0, 0.5, 8.0}) {
      Tensor s = e;
      for (auto& v : s.data()) v *= a;
      exact = exact && si_sdr(s.data(), r.data()) == base;
    }
    for (double a : {0.3, 1.7, 123.4}) {
      Tensor s = e;
      for (auto& v : s.data()) v *= a;
      drift = std::max(drift, std::fabs(si_sdr(s.data(), r.data()) - base));
    }
  }
  o.require(exact, "si_sdr changed under power-of-two scaling");
  o.require(drift < 1e-9, "si_sdr drift under arbitrary scaling " + std::to_string(drift));

  double snr_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Tensor c = random_tensor({3000}, rng);
    const Tensor n = random_tensor({2000 + rng() % 2000}, rng);
    const double snr = -20.0 + 40.0 * static_cast<double>(rng() % 10001) / 10000.0;
    const auto m = mix_at_snr(c.data(), n.data(), snr);
    const double realized = 10.0 * std::log10(mean_power(m.clean) / mean_power(m.noise));
    snr_err = std::max(snr_err, std::fabs(realized - snr));
  }
  o.require(snr_err < 1e-9, "mix_at_snr error " + std::to_string(snr_err) + " dB");
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "round trip %.1e, si_sdr exact under 2^k scaling (drift %.1e otherwise), SNR error %.1e dB",
                rt, drift, snr_err);
  o.note(buf);
  return o;
}

struct ParityRun {
  std::vector<std::string> logs;
  std::string table;
  std::vector<RunLog> parsed;
  double seconds = 0.0;
};

ParityRun parity_run(const fs::path& dir) {
  ParityRun out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto runs = experiment_from_config(preset_config("run_parity"));
  fs::create_directories(dir);
  for (const auto& rc : runs) {
    TrainResult r = train(rc);
    out.logs.push_back(r.log.to_jsonl());
    std::ofstream(dir / (rc.model.name + ".runlog.jsonl"), std::ios::binary) << out.logs.back();
    out.parsed.push_back(std::move(r.log));
  }
  out.table = emit_comparison_table(out.parsed, TableFormat::Csv);
  std::ofstream(dir / "comparison.csv", std::ios::binary) << out.table;
  out.seconds = seconds_since(t0);
  return out;
}

// 9. Desk-scale parity: both models improve by > 5 dB at 0 dB input SNR.
Outcome c9(const ParityRun& run) {
  Outcome o;
  const auto& real = run.parsed.at(0);
  const auto& cx = run.parsed.at(1);
  const double pr = static_cast<double>(real.params), pc = static_cast<double>(cx.params);
  o.require(std::fabs(pr - pc) <= 0.01 * std::max(pr, pc), "params not matched within 1%");
  double gains[2] = {0, 0};
  for (int i = 0; i < 2; ++i) {
    const auto& log = run.parsed[i];
    o.require(log.status == "ok", log.model + " " + log.status);
    for (const auto& m : log.metrics) {
      if (m.snr_db == 0.0) gains[i] = m.enhanced_sisdr - m.noisy_sisdr;
    }
    o.require(gains[i] > 5.0, log.model + " improves only " + num(gains[i], 2) + " dB at 0 dB");
  }
  o.require(run.table.find("abs_delta") != std::string::npos, "comparison table lacks |delta|");
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "%s %zu params +%.2f dB, %s %zu params +%.2f dB at 0 dB, |delta| %.2f dB, %.0f s",
                real.model.c_str(), static_cast<std::size_t>(real.params), gains[0], cx.model.c_str(),
                static_cast<std::size_t>(cx.params), gains[1], std::fabs(gains[0] - gains[1]),
                run.seconds);
  o.note(buf);
  return o;
}

// 10. Repeating the run reproduces the logs and table byte for byte.
Outcome c10(const ParityRun& a, const ParityRun& b) {
  Outcome o;
  o.require(a.logs.size() == b.logs.size(), "different run counts");
  for (std::size_t i = 0; i < std::min(a.logs.size(), b.logs.size()); ++i) {
    o.require(a.logs[i] == b.logs[i], "run log " + std::to_string(i) + " differs");
  }
  o.require(a.table == b.table, "comparison tables differ");
  std::size_t bytes = a.table.size();
  for (const auto& l : a.logs) bytes += l.size();
  o.note(std::to_string(bytes) + " bytes compared");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path dir = "acceptance_artifacts";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string n; std::getline(ss, n, ',');) only.insert(std::stoi(n));
    } else {
      dir = arg;
    }
  }
  auto wanted = [&](int n) { return only.empty() || only.count(n); };

  int failures = 0;
  auto report = [&](int n, const std::string& title, const std::function<Outcome()>& fn) {
    if (!wanted(n)) return;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "Table-1 parameters", c1);
  report(2, "Table-1 MACs", c2);
  report(3, "Table-5 and Table-2 cost parity", c3);
  report(4, "structured-real equivalence", c4);
  report(5, "gradient suite", c5);
  report(6, "gating invariants", c6);
  report(7, "parameter-parity law", c7);
  report(8, "DSP suite", c8);
  if (wanted(9) || wanted(10)) {
    std::optional<ParityRun> first;
    report(9, "desk-scale parity experiment", [&] {
      first = parity_run(dir / "run1");
      return c9(*first);
    });
    report(10, "determinism", [&] {
      if (!first) first = parity_run(dir / "run1");
      const ParityRun second = parity_run(dir / "run2");
      return c10(*first, second);
    });
  }
  return failures == 0 ? 0 : 1;
}
