#include "cplx/train.hpp"

#include "cplx/presets.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace cplx {

const double kEvalSnrs[3] = {-5.0, 0.0, 5.0};

// ---------------------------------------------------------------------------
// Adam

void adam_step(const std::vector<Parameter*>& params, AdamState& state, const AdamHyper& h) {
  for (const Parameter* p : params) {
    if (!p->grad().all_finite()) throw NonFiniteGradient("non-finite gradient in parameter " + p->name());
  }
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const Parameter* p : params) {
      state.m.emplace_back(p->value().shape());
      state.v.emplace_back(p->value().shape());
    }
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    double* w = params[k]->value().ptr();
    const double* g = params[k]->grad().ptr();
    double* m = state.m[k].ptr();
    double* v = state.v[k].ptr();
    const std::size_t n = params[k]->size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      w[i] -= h.step * (m[i] / c1) / (std::sqrt(v[i] / c2) + h.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Config

void RunConfig::validate() const {
  model.validate();
  auto bad = [](const std::string& why) { throw ConfigError("run config: " + why); };
  if (batch == 0) bad("run.batch must be positive");
  if (!(adam.step > 0.0)) bad("adam.step must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) bad("adam.beta1 must be in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) bad("adam.beta2 must be in [0, 1)");
  if (!(adam.eps > 0.0)) bad("adam.eps must be positive");
  if (corpus.train_examples == 0 && epochs > 0) bad("corpus.train must be positive");
  if (corpus.valid_examples == 0) bad("corpus.valid must be positive");
  if (corpus.eval_per_snr == 0) bad("corpus.eval_per_snr must be positive");
  if (!(corpus.duration_s > 0.0)) bad("corpus.duration must be positive");
  const auto samples = static_cast<std::size_t>(corpus.duration_s * model.framing.sample_rate);
  if (samples < model.framing.window_len) bad("corpus.duration is shorter than one window");
}

namespace {

const std::set<std::string> kRunKeys = {
    "run.model", "run.models", "run.loss", "run.batch", "run.epochs", "run.seed",
    "adam.step", "adam.beta1", "adam.beta2", "adam.eps",
    "corpus.seed", "corpus.train", "corpus.valid", "corpus.eval_per_snr", "corpus.duration"};

RunConfig run_settings(const KeyValueConfig& cfg) {
  cfg.reject_unknown({"run", "adam", "corpus"}, kRunKeys);
  RunConfig rc;
  rc.loss = parse_loss(cfg.get_or("run.loss", "sisdr"));
  rc.batch = cfg.get_size_or("run.batch", rc.batch);
  rc.epochs = cfg.get_size_or("run.epochs", rc.epochs);
  rc.seed = static_cast<std::uint64_t>(cfg.get_int_or("run.seed", static_cast<std::int64_t>(rc.seed)));
  rc.adam.step = cfg.get_double_or("adam.step", rc.adam.step);
  rc.adam.beta1 = cfg.get_double_or("adam.beta1", rc.adam.beta1);
  rc.adam.beta2 = cfg.get_double_or("adam.beta2", rc.adam.beta2);
  rc.adam.eps = cfg.get_double_or("adam.eps", rc.adam.eps);
  auto& c = rc.corpus;
  c.seed = static_cast<std::uint64_t>(cfg.get_int_or("corpus.seed", static_cast<std::int64_t>(c.seed)));
  c.train_examples = cfg.get_size_or("corpus.train", c.train_examples);
  c.valid_examples = cfg.get_size_or("corpus.valid", c.valid_examples);
  c.eval_per_snr = cfg.get_size_or("corpus.eval_per_snr", c.eval_per_snr);
  c.duration_s = cfg.get_double_or("corpus.duration", c.duration_s);
  return rc;
}

RunConfig with_model(RunConfig rc, ModelSpec spec) {
  rc.model = std::move(spec);
  rc.model.seed = rc.seed;
  rc.validate();
  return rc;
}

}  // namespace

RunConfig RunConfig::from_config(const KeyValueConfig& cfg) {
  auto runs = experiment_from_config(cfg);
  if (runs.size() != 1) throw ConfigError(cfg.source() + ": expected a single model, got run.models");
  return runs.front();
}

std::vector<RunConfig> experiment_from_config(const KeyValueConfig& cfg) {
  const RunConfig base = run_settings(cfg);
  const bool inline_model = cfg.has("model.family");
  const int sources = int(inline_model) + int(cfg.has("run.model")) + int(cfg.has("run.models"));
  if (sources != 1) {
    throw ConfigError(cfg.source() +
                      ": give exactly one of model.* sections, run.model or run.models");
  }
  std::vector<RunConfig> out;
  if (inline_model) {
    out.push_back(with_model(base, ModelSpec::from_config(cfg)));
    return out;
  }
  std::vector<std::string> names;
  if (cfg.has("run.model")) {
    names.push_back(cfg.get("run.model"));
  } else {
    std::stringstream ss(cfg.get("run.models"));
    for (std::string item; std::getline(ss, item, ',');) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) throw ConfigError(cfg.source() + ": empty entry in run.models");
      names.push_back(item.substr(b, e - b + 1));
    }
  }
  for (const auto& n : names) out.push_back(with_model(base, preset_spec(n)));
  return out;
}

KeyValueConfig RunConfig::to_config() const {
  KeyValueConfig cfg = model.to_config();
  cfg.set("run.loss", to_string(loss));
  cfg.set("run.batch", std::to_string(batch));
  cfg.set("run.epochs", std::to_string(epochs));
  cfg.set("run.seed", std::to_string(seed));
  cfg.set("adam.step", adam.step);
  cfg.set("adam.beta1", adam.beta1);
  cfg.set("adam.beta2", adam.beta2);
  cfg.set("adam.eps", adam.eps);
  cfg.set("corpus.seed", std::to_string(corpus.seed));
  cfg.set("corpus.train", std::to_string(corpus.train_examples));
  cfg.set("corpus.valid", std::to_string(corpus.valid_examples));
  cfg.set("corpus.eval_per_snr", std::to_string(corpus.eval_per_snr));
  cfg.set("corpus.duration", corpus.duration_s);
  return cfg;
}

// ---------------------------------------------------------------------------
// Data

namespace {

struct Prepared {
  Spectrogram noisy;
  Spectrogram clean;
  std::vector<double> clean_wave;
  std::vector<double> mixed_wave;
  double snr_db = 0.0;
};

Prepared prepare(MixtureExample ex, const Framing& framing) {
  Prepared p;
  p.noisy = stft(ex.mixed, framing);
  p.clean = stft(ex.clean, framing);
  p.clean_wave = std::move(ex.clean);
  p.mixed_wave = std::move(ex.mixed);
  p.snr_db = ex.snr_db;
  return p;
}

// Held-out sets use their own seed streams so they never overlap the training corpus.
std::uint64_t valid_seed(const CorpusConfig& c) { return c.seed + 1; }
std::uint64_t eval_seed(const CorpusConfig& c) { return c.seed + 2; }

struct Batch {
  ComplexPair noisy;  // [B, T, F]
  ComplexPair clean;  // [B, T, F]
  Tensor clean_wave;  // [B, L]
};

Batch make_batch(const std::vector<Prepared>& data, const std::vector<std::size_t>& order,
                 std::size_t begin, std::size_t end) {
  const std::size_t b = end - begin;
  const auto& first = data[order[begin]];
  const std::size_t t = first.noisy.frames();
  const std::size_t f = first.noisy.framing.bins();
  const std::size_t len = first.clean_wave.size();
  Batch out{ComplexPair(Tensor({b, t, f}), Tensor({b, t, f})),
            ComplexPair(Tensor({b, t, f}), Tensor({b, t, f})), Tensor({b, len})};
  const std::size_t plane = t * f;
  for (std::size_t i = 0; i < b; ++i) {
    const auto& p = data[order[begin + i]];
    std::memcpy(out.noisy.re.ptr() + i * plane, p.noisy.bins.re.ptr(), plane * sizeof(double));
    std::memcpy(out.noisy.im.ptr() + i * plane, p.noisy.bins.im.ptr(), plane * sizeof(double));
    std::memcpy(out.clean.re.ptr() + i * plane, p.clean.bins.re.ptr(), plane * sizeof(double));
    std::memcpy(out.clean.im.ptr() + i * plane, p.clean.bins.im.ptr(), plane * sizeof(double));
    std::memcpy(out.clean_wave.ptr() + i * len, p.clean_wave.data(), len * sizeof(double));
  }
  return out;
}

Var batch_loss(Graph& g, LossKind kind, const CVar& est, const Batch& b, const Framing& framing) {
  switch (kind) {
    case LossKind::SiSdr: return loss_sisdr(g, est, b.clean_wave, framing);
    case LossKind::L1Spec: return loss_l1_spec(g, est, b.clean);
    case LossKind::MseSpec: return loss_mse_spec(g, est, b.clean);
  }
  throw std::logic_error("unreachable loss");
}

struct ExampleScore {
  double noisy = 0.0;
  double enhanced = 0.0;
};

// Scores every example, fanning out over workers; each worker owns a disjoint index set.
std::vector<ExampleScore> score(Model& model, const std::vector<Prepared>& data) {
  std::vector<ExampleScore> out(data.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < data.size(); i += stride) {
      const auto& p = data[i];
      const Spectrogram est = model_forward(model, p.noisy);
      const auto wave = istft(est);
      out[i] = {si_sdr(p.mixed_wave, p.clean_wave), si_sdr(wave, p.clean_wave)};
    }
  };
  const std::size_t workers = std::min(eval_threads(), std::max<std::size_t>(data.size(), 1));
  if (workers <= 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w, workers);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<Prepared> eval_set(const CorpusConfig& c, const Framing& framing) {
  std::vector<Prepared> out;
  std::size_t index = 0;
  for (double snr : kEvalSnrs) {
    for (std::size_t i = 0; i < c.eval_per_snr; ++i) {
      out.push_back(prepare(synth_example(eval_seed(c), index++, c.duration_s, snr,
                                          framing.sample_rate),
                            framing));
    }
  }
  return out;
}

std::vector<BucketMetrics> bucket(const std::vector<ExampleScore>& s, std::size_t per) {
  std::vector<BucketMetrics> out;
  for (std::size_t b = 0; b < 3; ++b) {
    BucketMetrics m;
    m.snr_db = kEvalSnrs[b];
    m.count = per;
    for (std::size_t i = 0; i < per; ++i) {
      m.noisy_sisdr += s[b * per + i].noisy;
      m.enhanced_sisdr += s[b * per + i].enhanced;
    }
    m.noisy_sisdr /= static_cast<double>(per);
    m.enhanced_sisdr /= static_cast<double>(per);
    out.push_back(m);
  }
  return out;
}

double mean_enhanced(const std::vector<ExampleScore>& s) {
  double acc = 0.0;
  for (const auto& e : s) acc += e.enhanced;
  return acc / static_cast<double>(s.size());
}

std::vector<Tensor> snapshot(const std::vector<Parameter*>& params) {
  std::vector<Tensor> out;
  for (const auto* p : params) out.push_back(p->value());
  return out;
}

void restore(const std::vector<Parameter*>& params, const std::vector<Tensor>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = values[i];
}

}  // namespace

std::size_t eval_threads() {
  const char* env = std::getenv("CPLXBENCH_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1) return 1;
  return static_cast<std::size_t>(n);
}

std::vector<BucketMetrics> evaluate(Model& model, const CorpusConfig& corpus) {
  return bucket(score(model, eval_set(corpus, model.framing())), corpus.eval_per_snr);
}

std::vector<BucketMetrics> evaluate(const RunConfig& cfg, const std::string& checkpoint) {
  auto model = load_checkpoint(checkpoint);
  if (!(model->framing() == cfg.model.framing)) {
    throw std::invalid_argument("checkpoint " + checkpoint + " uses framing " +
                                std::to_string(model->framing().window_len) + "/" +
                                std::to_string(model->framing().hop) + ", the config expects " +
                                std::to_string(cfg.model.framing.window_len) + "/" +
                                std::to_string(cfg.model.framing.hop));
  }
  return evaluate(*model, cfg.corpus);
}

TrainResult train(const RunConfig& cfg) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  TrainResult result;
  result.best = build_model(cfg.model);
  Model& model = *result.best;
  RunLog& log = result.log;
  log.model = cfg.model.name;
  log.params = model.param_count();
  log.macs = count_macs(model, 1.0).macs;
  log.config = cfg.to_config().serialize();

  const Framing& framing = cfg.model.framing;
  const auto& c = cfg.corpus;
  std::vector<Prepared> train_set;
  for (auto& ex : synth_dataset(c.seed, c.train_examples, c.duration_s, framing.sample_rate)) {
    train_set.push_back(prepare(std::move(ex), framing));
  }
  std::vector<Prepared> valid_set;
  for (std::size_t i = 0; i < c.valid_examples; ++i) {
    valid_set.push_back(
        prepare(synth_example(valid_seed(c), i, c.duration_s, std::nullopt, framing.sample_rate),
                framing));
  }

  auto params = model.parameters();
  AdamState state;
  std::vector<Tensor> best = snapshot(params);
  log.best_valid_sisdr = mean_enhanced(score(model, valid_set));
  log.epochs.push_back({0, 0.0, log.best_valid_sisdr});

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs && log.status == "ok"; ++epoch) {
    const auto t0 = clock::now();
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch);
      const Batch b = make_batch(train_set, order, begin, end);
      for (auto* p : params) p->zero_grad();
      Graph g;
      CVar est = model.forward(g, g.constant(b.noisy));
      Var loss = batch_loss(g, cfg.loss, est, b, framing);
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        log.status = "diverged: non-finite loss at epoch " + std::to_string(epoch);
        break;
      }
      g.backward(loss);
      try {
        adam_step(params, state, cfg.adam);
      } catch (const NonFiniteGradient& e) {
        log.status = std::string("diverged: ") + e.what() + " at epoch " + std::to_string(epoch);
        break;
      }
      loss_sum += value;
      ++steps;
    }
    if (log.status != "ok") break;
    const double valid = mean_enhanced(score(model, valid_set));
    log.epochs.push_back({epoch, loss_sum / static_cast<double>(steps), valid});
    if (valid > log.best_valid_sisdr) {
      log.best_valid_sisdr = valid;
      log.best_epoch = epoch;
      best = snapshot(params);
    }
    log.epoch_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
  }

  restore(params, best);
  log.metrics = evaluate(model, c);
  return result;
}

// ---------------------------------------------------------------------------
// RunLog

std::string RunLog::to_jsonl() const {
  using nlohmann::ordered_json;
  std::string out;
  auto line = [&out](const ordered_json& j) { out += j.dump() + "\n"; };
  line({{"record", "run"}, {"model", model}, {"params", params}, {"macs", macs}, {"config", config}});
  for (const auto& e : epochs) {
    line({{"record", "epoch"}, {"epoch", e.epoch}, {"train_loss", e.train_loss},
          {"valid_sisdr", e.valid_sisdr}});
  }
  for (const auto& m : metrics) {
    line({{"record", "metrics"}, {"snr_db", m.snr_db}, {"count", m.count},
          {"noisy_sisdr", m.noisy_sisdr}, {"enhanced_sisdr", m.enhanced_sisdr}});
  }
  line({{"record", "end"}, {"status", status}, {"best_epoch", best_epoch},
        {"best_valid_sisdr", best_valid_sisdr}});
  return out;
}

RunLog RunLog::from_jsonl(const std::string& text) {
  RunLog log;
  std::stringstream ss(text);
  std::size_t line_no = 0;
  bool saw_run = false, saw_end = false;
  for (std::string line; std::getline(ss, line);) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "run log line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string kind = j.at("record");
      if (kind == "run") {
        log.model = j.at("model");
        log.params = j.at("params");
        log.macs = j.at("macs");
        log.config = j.at("config");
        saw_run = true;
      } else if (kind == "epoch") {
        EpochRecord e{j.at("epoch"), j.at("train_loss"), j.at("valid_sisdr")};
        if (!log.epochs.empty() && e.epoch <= log.epochs.back().epoch) {
          throw std::invalid_argument("epoch indices are not increasing");
        }
        log.epochs.push_back(e);
      } else if (kind == "metrics") {
        log.metrics.push_back({j.at("snr_db"), j.at("count"), j.at("noisy_sisdr"),
                               j.at("enhanced_sisdr")});
      } else if (kind == "end") {
        log.status = j.at("status");
        log.best_epoch = j.at("best_epoch");
        log.best_valid_sisdr = j.at("best_valid_sisdr");
        saw_end = true;
      } else {
        throw std::invalid_argument("unknown record '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
  if (!saw_run || !saw_end) throw std::invalid_argument("run log is missing its run or end record");
  return log;
}

// ---------------------------------------------------------------------------
// Tables

namespace {

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string render(const std::vector<std::vector<std::string>>& rows, TableFormat format) {
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (format == TableFormat::Csv) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
      out += "\n";
      continue;
    }
    out += "|";
    for (const auto& cell : row) out += " " + cell + " |";
    out += "\n";
    if (r == 0) {
      out += "|";
      for (std::size_t i = 0; i < row.size(); ++i) out += i ? "---:|" : "---|";
      out += "\n";
    }
  }
  return out;
}

}  // namespace

std::string emit_metrics_table(const std::string& model, const std::vector<BucketMetrics>& m,
                               TableFormat format) {
  std::vector<std::vector<std::string>> rows{
      {"model", "snr_db", "count", "noisy_sisdr", "enhanced_sisdr", "improvement"}};
  for (const auto& b : m) {
    rows.push_back({model, fixed(b.snr_db), std::to_string(b.count), fixed(b.noisy_sisdr),
                    fixed(b.enhanced_sisdr), fixed(b.enhanced_sisdr - b.noisy_sisdr)});
  }
  return render(rows, format);
}

std::string emit_comparison_table(const std::vector<RunLog>& logs, TableFormat format) {
  if (logs.empty()) throw std::invalid_argument("comparison table: no run logs");
  const std::size_t buckets = logs.front().metrics.size();
  for (const auto& l : logs) {
    if (l.metrics.size() != buckets) {
      throw std::invalid_argument("comparison table: run " + l.model + " has a different bucket set");
    }
  }
  const bool pair = logs.size() == 2;
  std::vector<std::string> header{"row", "noisy"};
  for (const auto& l : logs) header.push_back(l.model);
  if (pair) header.push_back("abs_delta");
  std::vector<std::vector<std::string>> rows{header};
  for (std::size_t b = 0; b < buckets; ++b) {
    char label[32];
    std::snprintf(label, sizeof label, "sisdr_%gdB", logs[0].metrics[b].snr_db);
    std::vector<std::string> row{label,
                                 fixed(logs[0].metrics[b].noisy_sisdr)};
    for (const auto& l : logs) row.push_back(fixed(l.metrics[b].enhanced_sisdr));
    if (pair) {
      row.push_back(fixed(std::fabs(logs[0].metrics[b].enhanced_sisdr -
                                    logs[1].metrics[b].enhanced_sisdr)));
    }
    rows.push_back(row);
  }
  std::vector<std::string> params{"params", ""}, macs{"macs", ""};
  for (const auto& l : logs) {
    params.push_back(std::to_string(l.params));
    macs.push_back(std::to_string(l.macs));
  }
  if (pair) {
    params.push_back("");
    macs.push_back("");
  }
  rows.push_back(params);
  rows.push_back(macs);
  return render(rows, format);
}

// ---------------------------------------------------------------------------
// Checkpoints: magic, spec text, then (name, shape, raw doubles) per parameter.

namespace {

constexpr char kMagic[8] = {'C', 'P', 'L', 'X', 'C', 'K', 'P', '1'};

void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error("truncated checkpoint " + path);
  return v;
}

std::string get_str(std::istream& in, const std::string& path) {
  const auto n = get_u64(in, path);
  if (n > (1u << 24)) throw std::runtime_error("corrupt checkpoint " + path);
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw std::runtime_error("truncated checkpoint " + path);
  }
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write(kMagic, sizeof kMagic);
  const std::string spec = model.spec().serialize();
  put_u64(out, spec.size());
  out.write(spec.data(), static_cast<std::streamsize>(spec.size()));
  const auto params = model.parameters();
  put_u64(out, params.size());
  for (const auto* p : params) {
    put_u64(out, p->name().size());
    out.write(p->name().data(), static_cast<std::streamsize>(p->name().size()));
    const Shape& s = p->value().shape();
    put_u64(out, s.size());
    for (auto d : s) put_u64(out, d);
    out.write(reinterpret_cast<const char*>(p->value().ptr()),
              static_cast<std::streamsize>(p->size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

std::unique_ptr<Model> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error(path + " is not a checkpoint");
  }
  auto model = build_model(ModelSpec::parse(get_str(in, path), path));
  auto params = model->parameters();
  if (get_u64(in, path) != params.size()) {
    throw std::runtime_error("checkpoint " + path + " does not match its model spec");
  }
  for (auto* p : params) {
    const std::string name = get_str(in, path);
    Shape s(get_u64(in, path));
    for (auto& d : s) d = get_u64(in, path);
    if (name != p->name() || s != p->value().shape()) {
      throw std::runtime_error("checkpoint " + path + ": parameter " + name +
                               " does not match model parameter " + p->name());
    }
    if (!in.read(reinterpret_cast<char*>(p->value().ptr()),
                 static_cast<std::streamsize>(p->size() * sizeof(double)))) {
      throw std::runtime_error("truncated checkpoint " + path);
    }
  }
  return model;
}

}  // namespace cplx
