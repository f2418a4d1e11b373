#include "cplx/presets.hpp"
#include "cplx/train.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace cplx;

namespace {

RunConfig tiny_run(OutputMode output) {
  RunConfig rc;
  rc.model.name = "tiny_linear";
  rc.model.output = output;
  rc.model.framing = {16000, 320, 160};
  rc.model.body = LinearStackSpec{Domain::Complex, {8}, true};
  rc.batch = 2;
  rc.epochs = 2;
  rc.corpus.train_examples = 4;
  rc.corpus.valid_examples = 2;
  rc.corpus.eval_per_snr = 2;
  rc.corpus.duration_s = 0.1;
  return rc;
}

void set_all(Model& m, double v) {
  for (auto* p : m.parameters()) p->value().fill(v);
}

}  // namespace

TEST_CASE("adam leaves a zero-gradient parameter in place") {
  Parameter p("w", Tensor({3}, {1.0, -2.0, 0.5}));
  AdamState st;
  for (int i = 0; i < 5; ++i) adam_step({&p}, st, {});
  CHECK(p.value() == Tensor({3}, {1.0, -2.0, 0.5}));
  CHECK(st.t == 5);
}

TEST_CASE("adam's first step moves each weight by the step size") {
  Parameter p("w", Tensor({2}, {0.0, 0.0}));
  p.grad()[0] = 3.0;
  p.grad()[1] = -0.02;
  AdamState st;
  AdamHyper h;
  h.step = 0.01;
  adam_step({&p}, st, h);
  // bias correction makes m/sqrt(v) = g/|g| on step one
  CHECK(p.value()[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p.value()[1] == doctest::Approx(0.01).epsilon(1e-5));
}

TEST_CASE("adam minimises a quadratic") {
  Parameter p("w", Tensor({1}, {0.0}));
  AdamState st;
  AdamHyper h;
  h.step = 0.1;
  for (int i = 0; i < 200; ++i) {
    p.grad()[0] = 2.0 * (p.value()[0] - 3.0);
    adam_step({&p}, st, h);
  }
  CHECK(std::fabs(p.value()[0] - 3.0) < 1e-2);
}

TEST_CASE("adam refuses non-finite gradients and names the parameter") {
  Parameter a("enc.w.re", Tensor({2}, {1.0, 2.0}));
  Parameter b("dec.b.im", Tensor({1}, {0.0}));
  a.grad()[0] = 1.0;
  b.grad()[0] = std::numeric_limits<double>::infinity();
  AdamState st;
  CHECK_THROWS_WITH_AS(adam_step({&a, &b}, st, {}), doctest::Contains("dec.b.im"), NonFiniteGradient);
  CHECK(a.value() == Tensor({2}, {1.0, 2.0}));
  CHECK(st.t == 0);
}

TEST_CASE("run configuration parsing") {
  const auto runs = experiment_from_config(preset_config("run_parity"));
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].model.name == "gcrn_s_crm");
  CHECK(runs[1].model.name == "cgcrn_s_crm");
  CHECK(runs[0].corpus.duration_s == 0.5);
  CHECK(runs[0].model.seed == runs[0].seed);

  const RunConfig smoke = RunConfig::from_config(preset_config("run_smoke"));
  const RunConfig again = RunConfig::from_config(smoke.to_config());
  CHECK(again.to_config().serialize() == smoke.to_config().serialize());

  KeyValueConfig bad = preset_config("run_smoke");
  bad.set("run.bogus", "1");
  CHECK_THROWS_AS(experiment_from_config(bad), ConfigError);
  KeyValueConfig both = preset_config("run_smoke");
  both.set("run.models", "gcrn_s, cgcrn_s");
  CHECK_THROWS_AS(experiment_from_config(both), ConfigError);
  KeyValueConfig zero = preset_config("run_smoke");
  zero.set("run.batch", "0");
  CHECK_THROWS_AS(experiment_from_config(zero), ConfigError);
}

TEST_CASE("an identity mask leaves the noisy score unchanged") {
  const RunConfig rc = tiny_run(OutputMode::Masking);
  auto m = build_model(rc.model);
  set_all(*m, 0.0);
  for (auto* p : m->parameters())
    if (p->name() == "fc1.b.re") p->value().fill(1.0);
  const auto metrics = evaluate(*m, rc.corpus);
  REQUIRE(metrics.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(metrics[i].snr_db == kEvalSnrs[i]);
    CHECK(metrics[i].count == 2);
    CHECK(metrics[i].enhanced_sisdr == doctest::Approx(metrics[i].noisy_sisdr).epsilon(1e-6));
    CHECK(metrics[i].noisy_sisdr == doctest::Approx(kEvalSnrs[i]).epsilon(0.5).scale(1.0));
  }
}

TEST_CASE("a silent estimate scores the floor") {
  const RunConfig rc = tiny_run(OutputMode::Mapping);
  auto m = build_model(rc.model);
  set_all(*m, 0.0);
  for (const auto& b : evaluate(*m, rc.corpus)) CHECK(b.enhanced_sisdr == -kSiSdrCap);
}

TEST_CASE("training is deterministic and logs every epoch") {
  const RunConfig rc = tiny_run(OutputMode::Masking);
  const TrainResult a = train(rc);
  const TrainResult b = train(rc);
  CHECK(a.log.status == "ok");
  REQUIRE(a.log.epochs.size() == 3);
  CHECK(a.log.epochs[0].epoch == 0);
  CHECK(a.log.epochs[0].train_loss == 0.0);
  CHECK(a.log.to_jsonl() == b.log.to_jsonl());
  CHECK(a.log.epoch_seconds.size() == 2);
  CHECK(a.log.params == build_model(rc.model)->param_count());

  RunConfig none = rc;
  none.epochs = 0;
  const TrainResult c = train(none);
  CHECK(c.log.epochs.size() == 1);
  CHECK(c.log.best_epoch == 0);
  CHECK(c.log.metrics.size() == 3);
}

TEST_CASE("run logs and checkpoints round trip") {
  const RunConfig rc = tiny_run(OutputMode::Masking);
  TrainResult r = train(rc);
  const std::string text = r.log.to_jsonl();
  const RunLog back = RunLog::from_jsonl(text);
  CHECK(back.to_jsonl() == text);
  CHECK(back.model == "tiny_linear");
  CHECK_THROWS(RunLog::from_jsonl("{not json"));

  const auto path = (std::filesystem::temp_directory_path() / "cplx_test.ckpt").string();
  save_checkpoint(path, *r.best);
  auto loaded = load_checkpoint(path);
  CHECK(loaded->spec().serialize() == r.best->spec().serialize());
  auto pa = r.best->parameters();
  auto pb = loaded->parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value() == pb[i]->value());

  const auto direct = evaluate(*r.best, rc.corpus);
  const auto via_file = evaluate(rc, path);
  for (std::size_t i = 0; i < 3; ++i) CHECK(direct[i].enhanced_sisdr == via_file[i].enhanced_sisdr);

  RunConfig other = rc;
  other.model.framing = {16000, 512, 128};
  CHECK_THROWS_AS(evaluate(other, path), std::invalid_argument);
  std::filesystem::remove(path);
  CHECK_THROWS(load_checkpoint(path));
}

TEST_CASE("tables") {
  RunLog a, b;
  a.model = "real";
  b.model = "complex";
  for (double snr : kEvalSnrs) {
    a.metrics.push_back({snr, 2, snr, snr + 3});
    b.metrics.push_back({snr, 2, snr, snr + 4});
  }
  const std::string cmp = emit_comparison_table({a, b}, TableFormat::Csv);
  CHECK(cmp.find("abs_delta") != std::string::npos);
  CHECK(cmp.find("sisdr_0dB") != std::string::npos);
  CHECK(emit_comparison_table({a}, TableFormat::Csv).find("abs_delta") == std::string::npos);
  const std::string m = emit_metrics_table("real", a.metrics, TableFormat::Markdown);
  CHECK(m.find("| real |") != std::string::npos);
}

TEST_CASE("separate gating trains without non-finite values at the default step") {
  RunConfig rc = tiny_run(OutputMode::Masking);
  rc.model = preset_spec("cgcrn_s_crm");
  std::get<GcrnSpec>(rc.model.body).gating = Gating::Separate;
  rc.model.name = "cgcrn_s_crm_separate";
  rc.corpus.duration_s = 0.5;
  rc.epochs = 1;
  const TrainResult r = train(rc);
  CHECK(r.log.status == "ok");
  for (const auto& e : r.log.epochs) {
    CHECK(std::isfinite(e.train_loss));
    CHECK(std::isfinite(e.valid_sisdr));
  }
}
