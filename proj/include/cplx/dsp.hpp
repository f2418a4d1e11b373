#pragma once

#include "cplx/graph.hpp"
#include "cplx/ops.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cplx {

inline constexpr double kSiSdrCap = 140.0;

/// STFT geometry. Analysis and synthesis both use a periodic Hann window.
struct Framing {
  std::size_t sample_rate = 16000;
  std::size_t window_len = 512;
  std::size_t hop = 128;

  std::size_t bins() const { return window_len / 2 + 1; }
  /// Centered framing: T = 1 + floor(samples / hop).
  std::size_t frames(std::size_t samples) const { return 1 + samples / hop; }
  std::size_t frames_for_duration(double seconds) const;
  void validate() const;
  std::vector<double> window() const;

  bool operator==(const Framing&) const = default;
};

struct Spectrogram {
  ComplexPair bins;  // [frames x bins]
  Framing framing;
  std::size_t length = 0;  // waveform samples the spectrogram was computed from

  std::size_t frames() const { return bins.re.dim(0); }
};

Spectrogram stft(std::span<const double> wave, const Framing& framing);
std::vector<double> istft(const Spectrogram& spec);

/// Differentiable inverse STFT of spec[B, T, F] to waveforms [B, length].
Var istft(Graph& g, const CVar& spec, const Framing& framing, std::size_t length);

struct MixtureExample {
  std::vector<double> clean;
  std::vector<double> noise;  // scaled to the requested SNR
  std::vector<double> mixed;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

double mean_power(std::span<const double> x);
/// Noise is looped or truncated to the clean length, then scaled to hit snr_db.
MixtureExample mix_at_snr(std::span<const double> clean, std::span<const double> noise,
                          double snr_db);

/// Scale-invariant SDR in dB, clamped to [-cap, cap].
double si_sdr(std::span<const double> estimate, std::span<const double> reference,
              double cap = kSiSdrCap);

enum class LossKind { SiSdr, L1Spec, MseSpec };
std::string to_string(LossKind k);
LossKind parse_loss(const std::string& name);

/// Negative mean SI-SDR of the resynthesised estimate against reference waveforms [B, L].
Var loss_sisdr(Graph& g, const CVar& est_spec, const Tensor& ref_waves, const Framing& framing);
/// Mean penalty over real part + imaginary part + magnitude, summed over the three terms.
Var loss_l1_spec(Graph& g, const CVar& est_spec, const ComplexPair& ref_spec);
Var loss_mse_spec(Graph& g, const CVar& est_spec, const ComplexPair& ref_spec);

/// Synthetic "speech" (amplitude-modulated harmonic stack) in tilted noise.
/// Examples are addressed by (seed, index); a fixed SNR overrides the U[-5, 5] dB draw.
MixtureExample synth_example(std::uint64_t seed, std::size_t index, double duration_s,
                             std::optional<double> snr_db = std::nullopt,
                             std::size_t sample_rate = 16000);
std::vector<MixtureExample> synth_dataset(std::uint64_t seed, std::size_t n, double duration_s,
                                          std::size_t sample_rate = 16000);

struct WavData {
  std::vector<double> samples;
  std::size_t sample_rate = 16000;
};
/// Mono 16-bit PCM RIFF/WAVE.
void write_wav(const std::string& path, std::span<const double> samples,
               std::size_t sample_rate = 16000);
WavData read_wav(const std::string& path);

}  // namespace cplx
