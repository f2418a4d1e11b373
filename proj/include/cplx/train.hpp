#pragma once

#include "cplx/accounting.hpp"
#include "cplx/config.hpp"
#include "cplx/dsp.hpp"
#include "cplx/models.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cplx {

/// A gradient with NaN or Inf; the message names the parameter.
class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamHyper {
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update. Complex weights are two real parameters and are
/// updated component-wise. Leaves everything untouched when any gradient is non-finite.
void adam_step(const std::vector<Parameter*>& params, AdamState& state, const AdamHyper& hyper);

struct CorpusConfig {
  std::uint64_t seed = 7;
  std::size_t train_examples = 200;
  std::size_t valid_examples = 24;
  std::size_t eval_per_snr = 16;
  double duration_s = 1.0;
};

struct RunConfig {
  ModelSpec model;
  LossKind loss = LossKind::SiSdr;
  AdamHyper adam;
  std::size_t batch = 4;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  CorpusConfig corpus;

  void validate() const;
  /// run.*, adam.* and corpus.* keys; the model comes from `model` sections in the same
  /// config or from `run.model = <preset>`.
  static RunConfig from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
};

/// Every model named by `run.models = a, b` (or the single inline/preset model), each with
/// the shared run, adam and corpus settings.
std::vector<RunConfig> experiment_from_config(const KeyValueConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // 0 for the untrained evaluation at epoch 0
  double valid_sisdr = 0.0;
};

struct BucketMetrics {
  double snr_db = 0.0;
  std::size_t count = 0;
  double noisy_sisdr = 0.0;
  double enhanced_sisdr = 0.0;
};

struct RunLog {
  std::string model;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::string config;  // serialized RunConfig
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_valid_sisdr = 0.0;
  std::vector<BucketMetrics> metrics;
  std::string status = "ok";
  /// Seconds per epoch. Kept out of the serialized log so that the log is reproducible.
  std::vector<double> epoch_seconds;

  std::string to_jsonl() const;
  static RunLog from_jsonl(const std::string& text);
};

struct TrainResult {
  RunLog log;
  std::unique_ptr<Model> best;
};

/// Deterministic training. A non-finite loss or gradient stops the run with status
/// "diverged: ..." and the log so far.
TrainResult train(const RunConfig& cfg);

/// Per-SNR-bucket (-5/0/5 dB) mean SI-SDR of noisy and enhanced signals on the held-out
/// set. Worker count comes from CPLXBENCH_THREADS; the merge order is fixed.
std::vector<BucketMetrics> evaluate(Model& model, const CorpusConfig& corpus);
/// Evaluates a checkpoint. Throws when its framing differs from the configured model's.
std::vector<BucketMetrics> evaluate(const RunConfig& cfg, const std::string& checkpoint);

std::string emit_metrics_table(const std::string& model, const std::vector<BucketMetrics>& m,
                               TableFormat format);
/// One column per run plus |delta| when exactly two runs are given.
std::string emit_comparison_table(const std::vector<RunLog>& logs, TableFormat format);

void save_checkpoint(const std::string& path, Model& model);
std::unique_ptr<Model> load_checkpoint(const std::string& path);

/// Worker count for evaluation: CPLXBENCH_THREADS when set and positive, else 1.
std::size_t eval_threads();

extern const double kEvalSnrs[3];

}  // namespace cplx
