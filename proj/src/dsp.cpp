#include "cplx/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cplx {

namespace {

// Real DFT basis for one window length. Angles are reduced exactly via (k*n mod N).
struct DftBasis {
  Tensor fwd_cos;  // [N, F]
  Tensor fwd_sin;  // [N, F], holds -sin
  Tensor inv_cos;  // [F, N], c_k cos / N
  Tensor inv_sin;  // [F, N], -c_k sin / N
};

std::shared_ptr<const DftBasis> dft_basis(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const DftBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const std::size_t bins = n / 2 + 1;
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    cos_table[m] = std::cos(a);
    sin_table[m] = std::sin(a);
  }
  auto b = std::make_shared<DftBasis>();
  b->fwd_cos = Tensor({n, bins});
  b->fwd_sin = Tensor({n, bins});
  b->inv_cos = Tensor({bins, n});
  b->inv_sin = Tensor({bins, n});
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    const double ck = (edge ? 1.0 : 2.0) / static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t m = (k * t) % n;
      b->fwd_cos.at(t, k) = cos_table[m];
      b->fwd_sin.at(t, k) = -sin_table[m];
      b->inv_cos.at(k, t) = ck * cos_table[m];
      b->inv_sin.at(k, t) = -ck * sin_table[m];
    }
  }
  cache.emplace(n, b);
  return b;
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t len) {
  const auto n = static_cast<std::ptrdiff_t>(len);
  if (i < 0) i = -i;
  if (i >= n) i = 2 * (n - 1) - i;
  return static_cast<std::size_t>(i);
}

// Sum over frames of the squared window at each padded sample position.
std::vector<double> window_power_sum(const Framing& f, std::size_t frames, std::size_t padded) {
  const auto w = f.window();
  std::vector<double> acc(padded, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < f.window_len && t * f.hop + n < padded; ++n) {
      acc[t * f.hop + n] += w[n] * w[n];
    }
  }
  return acc;
}

// Portable uniform in [0, 1).
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }
double gaussian(std::mt19937_64& rng) {
  double u1 = unit(rng);
  while (u1 <= 0.0) u1 = unit(rng);
  const double u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t Framing::frames_for_duration(double seconds) const {
  if (!(seconds > 0.0)) throw std::invalid_argument("duration must be > 0");
  const auto samples = static_cast<std::size_t>(std::floor(seconds * sample_rate + 1e-9));
  return frames(samples);
}

void Framing::validate() const {
  if (sample_rate == 0 || window_len < 2 || hop == 0 || hop > window_len) {
    throw std::invalid_argument("framing: require 0 < hop <= window (window " +
                                std::to_string(window_len) + ", hop " + std::to_string(hop) +
                                ")");
  }
}

std::vector<double> Framing::window() const {
  std::vector<double> w(window_len);
  for (std::size_t n = 0; n < window_len; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                static_cast<double>(window_len));
  }
  return w;
}

Spectrogram stft(std::span<const double> wave, const Framing& framing) {
  framing.validate();
  const std::size_t n = framing.window_len;
  if (wave.size() < n) {
    throw std::invalid_argument("stft: waveform shorter than the window (" +
                                std::to_string(wave.size()) + " < " + std::to_string(n) + ")");
  }
  const std::size_t pad = n / 2;
  const std::size_t frames = framing.frames(wave.size());
  const auto w = framing.window();
  Tensor segs({frames, n});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto pos = static_cast<std::ptrdiff_t>(t * framing.hop + k) -
                       static_cast<std::ptrdiff_t>(pad);
      segs.at(t, k) = w[k] * wave[reflect_index(pos, wave.size())];
    }
  }
  auto basis = dft_basis(n);
  Spectrogram s;
  s.bins = ComplexPair(matmul(segs, basis->fwd_cos), matmul(segs, basis->fwd_sin));
  s.framing = framing;
  s.length = wave.size();
  return s;
}

std::vector<double> istft(const Spectrogram& spec) {
  const Framing& f = spec.framing;
  f.validate();
  if (spec.bins.re.rank() != 2 || spec.bins.re.dim(1) != f.bins()) {
    throw DimensionError("istft: spectrogram does not match framing bins " +
                         std::to_string(f.bins()) + ", got " + shape_str(spec.bins.shape()));
  }
  const std::size_t n = f.window_len, pad = n / 2, frames = spec.frames();
  const std::size_t padded = spec.length + 2 * pad;
  auto basis = dft_basis(n);
  Tensor segs = add(matmul(spec.bins.re, basis->inv_cos), matmul(spec.bins.im, basis->inv_sin));
  const auto w = f.window();
  std::vector<double> acc(padded, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < n && t * f.hop + k < padded; ++k) {
      acc[t * f.hop + k] += w[k] * segs.at(t, k);
    }
  }
  const auto norm = window_power_sum(f, frames, padded);
  std::vector<double> out(spec.length);
  for (std::size_t i = 0; i < spec.length; ++i) out[i] = acc[i + pad] / norm[i + pad];
  return out;
}

Var istft(Graph& g, const CVar& spec, const Framing& framing, std::size_t length) {
  framing.validate();
  const Shape& s = spec.shape();
  if (s.size() != 3 || s[2] != framing.bins()) {
    throw DimensionError("istft: expected [B, T, " + std::to_string(framing.bins()) +
                         "], got " + shape_str(s));
  }
  const std::size_t batch = s[0], frames = s[1], n = framing.window_len, pad = n / 2;
  const std::size_t padded = length + 2 * pad;
  auto basis = dft_basis(n);
  Var re = reshape(spec.re, {batch * frames, s[2]});
  Var im = reshape(spec.im, {batch * frames, s[2]});
  Var segs = add(matmul(re, g.constant(basis->inv_cos)), matmul(im, g.constant(basis->inv_sin)));
  const auto w = framing.window();
  segs = mul_broadcast(reshape(segs, {batch, frames, n}), Tensor({n}, w));
  Var acc = overlap_add(segs, framing.hop, padded);
  const auto norm = window_power_sum(framing, frames, padded);
  Tensor inv({padded});
  for (std::size_t i = 0; i < padded; ++i) inv[i] = norm[i] > 0.0 ? 1.0 / norm[i] : 0.0;
  return slice(mul_broadcast(acc, inv), 1, pad, pad + length);
}

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

MixtureExample mix_at_snr(std::span<const double> clean, std::span<const double> noise,
                          double snr_db) {
  if (clean.empty() || noise.empty()) throw std::invalid_argument("mix_at_snr: empty input");
  std::vector<double> looped(clean.size());
  for (std::size_t i = 0; i < looped.size(); ++i) looped[i] = noise[i % noise.size()];
  const double pc = mean_power(clean);
  const double pn = mean_power(looped);
  if (!(pc > 0.0) || !(pn > 0.0)) throw std::invalid_argument("mix_at_snr: zero-energy input");
  const double gain = std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
  MixtureExample m;
  m.clean.assign(clean.begin(), clean.end());
  m.noise.resize(clean.size());
  m.mixed.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    m.noise[i] = gain * looped[i];
    m.mixed[i] = clean[i] + m.noise[i];
  }
  m.snr_db = snr_db;
  return m;
}

double si_sdr(std::span<const double> estimate, std::span<const double> reference, double cap) {
  if (estimate.size() != reference.size()) {
    throw DimensionError("si_sdr", {estimate.size()}, {reference.size()});
  }
  double er = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    er += estimate[i] * reference[i];
    rr += reference[i] * reference[i];
  }
  if (!(rr > 0.0)) throw std::invalid_argument("si_sdr: zero-energy reference");
  const double a = er / rr;
  double q = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double n = estimate[i] - a * reference[i];
    q += n * n;
  }
  const double p = a * a * rr;
  if (p <= 0.0) return -cap;
  if (q <= 0.0) return cap;
  return std::clamp(10.0 * std::log10(p / q), -cap, cap);
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::SiSdr: return "sisdr";
    case LossKind::L1Spec: return "l1";
    case LossKind::MseSpec: return "mse";
  }
  return "?";
}

LossKind parse_loss(const std::string& name) {
  if (name == "sisdr") return LossKind::SiSdr;
  if (name == "l1") return LossKind::L1Spec;
  if (name == "mse") return LossKind::MseSpec;
  throw std::invalid_argument("unknown loss '" + name + "' (expected sisdr, l1 or mse)");
}

Var loss_sisdr(Graph& g, const CVar& est_spec, const Tensor& ref_waves, const Framing& framing) {
  if (ref_waves.rank() != 2 || ref_waves.dim(0) != est_spec.re.dim(0)) {
    throw DimensionError("loss_sisdr", est_spec.shape(), ref_waves.shape());
  }
  Var wave = istft(g, est_spec, framing, ref_waves.dim(1));
  return scale(mean(si_sdr_rows(wave, ref_waves, kSiSdrCap)), -1.0);
}

namespace {

Var spectral_loss(Graph& g, const CVar& est, const ComplexPair& ref, bool squared) {
  if (est.shape() != ref.shape()) throw DimensionError("spectral loss", est.shape(), ref.shape());
  auto penalty = [&](const Var& d) { return mean(squared ? square(d) : abs(d)); };
  Var ref_re = g.constant(ref.re), ref_im = g.constant(ref.im);
  Var ref_mag = g.constant(complex_magnitude(ref, 0.0));
  Var est_mag = complex_magnitude(est, 0.0);
  return add(add(penalty(sub(est.re, ref_re)), penalty(sub(est.im, ref_im))),
             penalty(sub(est_mag, ref_mag)));
}

}  // namespace

Var loss_l1_spec(Graph& g, const CVar& est_spec, const ComplexPair& ref_spec) {
  return spectral_loss(g, est_spec, ref_spec, false);
}

Var loss_mse_spec(Graph& g, const CVar& est_spec, const ComplexPair& ref_spec) {
  return spectral_loss(g, est_spec, ref_spec, true);
}

MixtureExample synth_example(std::uint64_t seed, std::size_t index, double duration_s,
                             std::optional<double> snr_db, std::size_t sample_rate) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("synth: duration must be > 0");
  const std::uint64_t example_seed = splitmix64(seed ^ splitmix64(index + 1));
  std::mt19937_64 rng(example_seed);
  const auto len = static_cast<std::size_t>(std::floor(duration_s * sample_rate + 1e-9));
  const double fs = static_cast<double>(sample_rate);
  const double two_pi = 2.0 * std::numbers::pi;

  const double f0 = uniform(rng, 80.0, 300.0);
  const auto harmonics = 3 + static_cast<std::size_t>(unit(rng) * 6.0);  // 3..8
  std::vector<double> amp(harmonics), phase(harmonics);
  for (std::size_t k = 0; k < harmonics; ++k) {
    amp[k] = uniform(rng, 0.3, 1.0) / static_cast<double>(k + 1);
    phase[k] = uniform(rng, 0.0, two_pi);
  }
  const double am_rate = uniform(rng, 2.0, 8.0);
  const double am_phase = uniform(rng, 0.0, two_pi);
  std::vector<double> clean(len);
  for (std::size_t n = 0; n < len; ++n) {
    const double t = static_cast<double>(n) / fs;
    double s = 0.0;
    for (std::size_t k = 0; k < harmonics; ++k) {
      s += amp[k] * std::sin(two_pi * static_cast<double>(k + 1) * f0 * t + phase[k]);
    }
    clean[n] = (0.55 + 0.45 * std::sin(two_pi * am_rate * t + am_phase)) * s;
  }

  // First-order recursion: positive coefficient tilts energy low, negative tilts it high.
  const double tilt = uniform(rng, -0.9, 0.9);
  std::vector<double> noise(len);
  double state = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    state = gaussian(rng) + tilt * state;
    noise[n] = state;
  }
  const double snr = uniform(rng, -5.0, 5.0);
  MixtureExample m = mix_at_snr(clean, noise, snr_db.value_or(snr));
  m.seed = example_seed;
  return m;
}

std::vector<MixtureExample> synth_dataset(std::uint64_t seed, std::size_t n, double duration_s,
                                          std::size_t sample_rate) {
  if (n == 0) throw std::invalid_argument("synth_dataset: n must be >= 1");
  std::vector<MixtureExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(synth_example(seed, i, duration_s, std::nullopt, sample_rate));
  }
  return out;
}

namespace {

void put_u32(std::ofstream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ofstream& os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

std::uint32_t get_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void write_wav(const std::string& path, std::span<const double> samples, std::size_t sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_wav: cannot open " + path);
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  put_u32(os, 16);
  put_u16(os, 1);
  put_u16(os, 1);
  put_u32(os, static_cast<std::uint32_t>(sample_rate));
  put_u32(os, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(os, 2);
  put_u16(os, 16);
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (double v : samples) {
    const double c = std::clamp(v, -1.0, 1.0);
    put_u16(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
}

WavData read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("read_wav: " + path + " is not a RIFF/WAVE file");
  }
  WavData out;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = get_u32(&bytes[pos + 4]);
    const unsigned char* body = &bytes[pos + 8];
    if (pos + 8 + size > bytes.size()) break;
    if (std::memcmp(&bytes[pos], "fmt ", 4) == 0) {
      if (get_u16(body) != 1 || get_u16(body + 2) != 1 || get_u16(body + 14) != 16) {
        throw std::runtime_error("read_wav: only mono 16-bit PCM is supported");
      }
      out.sample_rate = get_u32(body + 4);
      have_fmt = true;
    } else if (std::memcmp(&bytes[pos], "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error("read_wav: data chunk before fmt chunk");
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] = static_cast<std::int16_t>(get_u16(body + 2 * i)) / 32767.0;
      }
      return out;
    }
    pos += 8 + size + (size & 1);
  }
  throw std::runtime_error("read_wav: no data chunk in " + path);
}

}  // namespace cplx
