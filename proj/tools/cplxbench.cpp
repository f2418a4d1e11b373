// cplxbench: cost tables, training and evaluation of real/complex model pairs.
#include "cplx/accounting.hpp"
#include "cplx/presets.hpp"
#include "cplx/train.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cplx;

namespace {

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::string format = "csv";
  std::string checkpoint;
  std::int64_t seed = -1;
  double duration = 1.0;
};

[[noreturn]] void fail(const std::string& why) { throw std::runtime_error(why); }

KeyValueConfig load_config(const Options& o) {
  if (!o.config.empty() && !o.preset.empty()) fail("give either --config or --preset, not both");
  if (o.config.empty() && o.preset.empty()) fail("missing --config or --preset");
  KeyValueConfig cfg = o.config.empty() ? preset_config(o.preset) : KeyValueConfig::load(o.config);
  if (o.seed >= 0) cfg.set("run.seed", std::to_string(o.seed));
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) fail("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string ext(TableFormat f) { return f == TableFormat::Csv ? ".csv" : ".md"; }

fs::path out_dir(const Options& o) {
  if (o.out.empty()) return {};
  fs::create_directories(o.out);
  return o.out;
}

void emit(const Options& o, const std::string& stem, const std::string& text) {
  std::cout << text;
  if (auto dir = out_dir(o); !dir.empty()) write_file(dir / (stem + ext(parse_table_format(o.format))), text);
}

int cmd_count(const Options& o) {
  const TableFormat format = parse_table_format(o.format);
  std::vector<CostReport> reports;
  std::string stem;
  const auto suites = suite_names();
  if (!o.preset.empty() && std::find(suites.begin(), suites.end(), o.preset) != suites.end()) {
    if (!o.config.empty()) fail("give either --config or --preset, not both");
    reports = cost_suite(o.preset, o.duration);
    stem = o.preset;
  } else {
    const ModelSpec spec = ModelSpec::from_config(load_config(o));
    reports.push_back(count_macs(*build_model(spec), o.duration));
    stem = spec.name;
  }
  emit(o, stem + "_cost", emit_cost_table(reports, format));
  return 0;
}

// Real/complex pairs must be matched in size and the complex side must cost more.
void check_pair(const std::vector<RunConfig>& runs) {
  if (runs.size() != 2) return;
  auto a = build_model(runs[0].model);
  auto b = build_model(runs[1].model);
  const double pa = static_cast<double>(a->param_count());
  const double pb = static_cast<double>(b->param_count());
  if (std::fabs(pa - pb) > 0.01 * std::max(pa, pb)) {
    fail("pair " + runs[0].model.name + " / " + runs[1].model.name +
         " is not parameter-matched within 1% (" + std::to_string(a->param_count()) + " vs " +
         std::to_string(b->param_count()) + ")");
  }
  if (count_macs(*b).macs <= count_macs(*a).macs) {
    fail("pair " + runs[0].model.name + " / " + runs[1].model.name +
         ": the complex model should cost more MACs than the real one");
  }
}

int cmd_train(const Options& o) {
  const TableFormat format = parse_table_format(o.format);
  const KeyValueConfig cfg = load_config(o);
  const auto runs = experiment_from_config(cfg);
  check_pair(runs);
  const fs::path dir = out_dir(o);
  if (!dir.empty()) write_file(dir / "config.cfg", cfg.serialize());
  std::cout << "# config\n" << cfg.serialize();

  std::vector<RunLog> logs;
  std::string timings;
  for (const auto& rc : runs) {
    std::cerr << "training " << rc.model.name << " (" << build_model(rc.model)->param_count()
              << " params, " << rc.epochs << " epochs)\n";
    TrainResult r = train(rc);
    const std::string name = rc.model.name;
    if (!dir.empty()) {
      write_file(dir / (name + ".runlog.jsonl"), r.log.to_jsonl());
      save_checkpoint((dir / (name + ".ckpt")).string(), *r.best);
      write_file(dir / (name + "_metrics" + ext(format)),
                 emit_metrics_table(name, r.log.metrics, format));
    }
    for (std::size_t e = 0; e < r.log.epoch_seconds.size(); ++e) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s,%zu,%.3f\n", name.c_str(), e + 1, r.log.epoch_seconds[e]);
      timings += buf;
    }
    std::cout << emit_metrics_table(name, r.log.metrics, format);
    if (r.log.status != "ok") fail(name + " " + r.log.status);
    logs.push_back(std::move(r.log));
  }
  if (!dir.empty()) write_file(dir / "timings.csv", "model,epoch,seconds\n" + timings);
  if (logs.size() > 1) emit(o, "comparison", emit_comparison_table(logs, format));
  return 0;
}

int cmd_eval(const Options& o) {
  if (o.checkpoint.empty()) fail("missing --checkpoint");
  const TableFormat format = parse_table_format(o.format);
  const RunConfig rc = RunConfig::from_config(load_config(o));
  const auto metrics = evaluate(rc, o.checkpoint);
  emit(o, rc.model.name + "_eval", emit_metrics_table(rc.model.name, metrics, format));
  return 0;
}

int cmd_report(const Options& o, const std::string& dir_arg) {
  const std::string dir = dir_arg.empty() ? o.out : dir_arg;
  if (dir.empty()) fail("report needs a run directory");
  if (!fs::is_directory(dir)) fail("no such directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 13 && name.ends_with(".runlog.jsonl")) files.push_back(entry.path());
  }
  if (files.empty()) fail("no run logs in " + dir);
  std::sort(files.begin(), files.end());
  const TableFormat format = parse_table_format(o.format);
  std::vector<RunLog> logs;
  std::vector<CostReport> costs;
  for (const auto& f : files) {
    logs.push_back(RunLog::from_jsonl(read_file(f)));
    const ModelSpec spec = ModelSpec::parse(logs.back().config, f.string());
    costs.push_back(count_macs(*build_model(spec)));
  }
  std::cout << emit_comparison_table(logs, format) << "\n" << emit_cost_table(costs, format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real vs complex speech enhancement workbench"};
  app.require_subcommand(1);
  Options o;
  std::string report_dir;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Configuration file");
    sub->add_option("--preset", o.preset, "Built-in configuration or cost suite");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "markdown"}));
  };

  auto* count = app.add_subcommand("count", "Parameter and MAC tables");
  add_common(count);
  count->add_option("--duration", o.duration, "Signal length in seconds")->check(CLI::PositiveNumber);

  auto* trn = app.add_subcommand("train", "Train one model or a real/complex pair");
  add_common(trn);
  trn->add_option("--seed", o.seed, "Override run.seed")->check(CLI::NonNegativeNumber);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint per SNR bucket");
  add_common(ev);
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint written by train")->required();
  ev->add_option("--seed", o.seed, "Override run.seed")->check(CLI::NonNegativeNumber);

  auto* rep = app.add_subcommand("report", "Join run logs and cost reports");
  add_common(rep);
  rep->add_option("dir", report_dir, "Directory holding *.runlog.jsonl");

  auto* list = app.add_subcommand("list", "List built-in configurations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*count) return cmd_count(o);
    if (*trn) return cmd_train(o);
    if (*ev) return cmd_eval(o);
    if (*rep) return cmd_report(o, report_dir);
    if (*list) {
      for (const auto& s : suite_names()) std::cout << s << " (suite)\n";
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "cplxbench: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
