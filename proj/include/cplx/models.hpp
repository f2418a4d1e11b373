#pragma once

#include "cplx/dsp.hpp"
#include "cplx/layers.hpp"
#include "cplx/model_spec.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cplx {

/// One layer as seen by the cost accountant: shapes are traced with batch 1 and a
/// single frame, and `time_axis` says where the frame count goes.
struct LayerSlot {
  std::string name;
  const Layer* layer = nullptr;
  Shape input;
  Shape output;
  std::size_t time_axis = 0;
};

class Model {
 public:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {}
  virtual ~Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelSpec& spec() const { return spec_; }
  const Framing& framing() const { return spec_.framing; }
  const std::vector<LayerSlot>& slots() const { return slots_; }
  std::vector<Parameter*> parameters();
  std::size_t param_count() const;

  /// Raw network output for noisy[B, T, F], before the output head.
  virtual CVar network(Graph& g, const CVar& noisy) = 0;
  /// Network followed by the output head: the estimated clean spectrum [B, T, F].
  CVar forward(Graph& g, const CVar& noisy);

 protected:
  template <class L, class... Args>
  L& add_layer(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }
  void add_slot(std::string name, const Layer& layer, Shape input, Shape output,
                std::size_t time_axis);

  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<LayerSlot> slots_;
};

/// Mapping: net. Masking: noisy * net (complex product). PolarMasking: noisy * net
/// with the mask magnitude squashed by tanh.
CVar apply_output_head(OutputMode mode, const CVar& noisy, const CVar& net);

std::unique_ptr<Model> build_model(const ModelSpec& spec);

// Reference builders used by the accounting presets and the tests.
ModelSpec linear_stack_spec(Domain domain, const Framing& framing = {16000, 320, 160});
ModelSpec lstm_stack_spec(LstmVariant variant, const Framing& framing = {16000, 512, 128});
std::unique_ptr<Model> build_linear_stack(Domain domain);
std::unique_ptr<Model> build_lstm_stack(LstmVariant variant);
std::unique_ptr<Model> build_unet(const UNetSpec& body, const Framing& framing);
std::unique_ptr<Model> build_gcrn(const GcrnSpec& body, OutputMode output,
                                  const Framing& framing = {16000, 320, 160});
std::unique_ptr<Model> build_dccrn(const DccrnSpec& body, const Framing& framing);

/// Single-example inference. Throws when the spectrogram framing differs from the model's.
Spectrogram model_forward(Model& model, const Spectrogram& noisy);

}  // namespace cplx
