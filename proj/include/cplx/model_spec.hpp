#pragma once

#include "cplx/config.hpp"
#include "cplx/dsp.hpp"
#include "cplx/layers.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace cplx {

/// A spec that cannot be built. The message starts with the spec name and the reason.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Family { LinearStack, LstmStack, UNet, Gcrn, Dccrn };
/// Mapping emits the clean spectrum; Masking multiplies the noisy input by a complex mask;
/// PolarMasking bounds the mask magnitude with tanh and keeps its phase.
enum class OutputMode { Mapping, Masking, PolarMasking };

std::string to_string(Family f);
std::string to_string(OutputMode m);

struct LinearStackSpec {
  Domain domain = Domain::Complex;
  std::vector<std::size_t> hidden{406, 406};  // per part for complex
  bool bias = true;
};

struct LstmStackSpec {
  LstmVariant variant = LstmVariant::Real;
  std::size_t hidden = 1024;  // per part for complex variants
  std::size_t layers = 3;
  LstmBias bias = LstmBias::PerGate;
};

/// Conv encoder / deconv decoder with skip concatenation and no recurrent bottleneck.
/// Channel counts are in the layer's own domain (per part when complex).
struct UNetSpec {
  Domain domain = Domain::Complex;
  std::vector<std::size_t> channels;
  std::vector<std::size_t> kernel_t;
  std::vector<std::size_t> kernel_f;
  std::vector<std::size_t> stride_f;
  ActivationKind activation = ActivationKind::ELU;
};

/// Gated convolutional recurrent network with per-component domain switches.
struct GcrnSpec {
  LstmVariant bottleneck = LstmVariant::Real;  // Real (grouped) or QuasiComplex
  Domain encoder = Domain::Real;
  Domain decoder = Domain::Real;
  Gating gating = Gating::Magnitude;  // used by complex GLUs only
  std::vector<std::size_t> channels{16, 32, 64, 128, 256};  // real channel plan
  std::vector<std::size_t> complex_channels;  // per part; empty means channels / 2
  std::size_t kernel_f = 3;
  std::size_t lstm_layers = 2;
  std::size_t lstm_groups = 2;
  LstmBias lstm_bias = LstmBias::InputAndHidden;

  /// Channel plan used by layers of domain d.
  std::vector<std::size_t> plan(Domain d) const;
};

/// Conv encoder, LSTM bottleneck with a linear projection, deconv decoder.
/// Channel and width counts are real-scalar totals; a complex layer uses half per part.
struct DccrnSpec {
  Domain domain = Domain::Complex;
  std::vector<std::size_t> channels{32, 64, 128, 256, 256, 256};
  std::size_t kernel_t = 2;
  std::size_t kernel_f = 5;
  std::size_t lstm_hidden = 256;
  std::size_t lstm_layers = 2;
  LstmBias lstm_bias = LstmBias::PerGate;
};

using FamilySpec = std::variant<LinearStackSpec, LstmStackSpec, UNetSpec, GcrnSpec, DccrnSpec>;

struct ModelSpec {
  std::string name = "model";
  OutputMode output = OutputMode::Mapping;
  Framing framing;
  std::uint64_t seed = 1;
  FamilySpec body = LinearStackSpec{};

  Family family() const { return static_cast<Family>(body.index()); }
  /// Throws SpecError with a named reason.
  void validate() const;

  static ModelSpec from_config(const KeyValueConfig& cfg);
  static ModelSpec parse(const std::string& text, const std::string& source = "<spec>");
  KeyValueConfig to_config() const;
  std::string serialize() const { return to_config().serialize(); }
};

Domain parse_domain(const std::string& s);
LstmVariant parse_variant(const std::string& s);
Gating parse_gating(const std::string& s);
LstmBias parse_lstm_bias(const std::string& s);
OutputMode parse_output(const std::string& s);
Family parse_family(const std::string& s);

}  // namespace cplx
