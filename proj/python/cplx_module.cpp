// Python bindings: cost accounting, DSP helpers and training on the synthetic corpus.
#include "cplx/accounting.hpp"
#include "cplx/presets.hpp"
#include "cplx/train.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cplx;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

Framing framing_of(std::size_t window, std::size_t hop) {
  Framing f{16000, window, hop};
  f.validate();
  return f;
}

ModelSpec spec_of(const std::string& name_or_text) {
  if (has_preset(name_or_text)) return preset_spec(name_or_text);
  return ModelSpec::parse(name_or_text, "<python>");
}

py::dict report_dict(const CostReport& r) {
  py::dict d;
  d["model"] = r.model;
  d["params"] = r.params;
  d["macs"] = r.macs;
  d["window"] = r.framing.window_len;
  d["hop"] = r.framing.hop;
  d["frames"] = r.frames;
  d["duration_s"] = r.duration_s;
  py::list layers;
  for (const auto& e : r.entries) layers.append(py::make_tuple(e.name, e.params, e.macs));
  d["layers"] = layers;
  return d;
}

py::list metrics_list(const std::vector<BucketMetrics>& ms) {
  py::list out;
  for (const auto& m : ms) {
    py::dict d;
    d["snr_db"] = m.snr_db;
    d["count"] = m.count;
    d["noisy_sisdr"] = m.noisy_sisdr;
    d["enhanced_sisdr"] = m.enhanced_sisdr;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(cplx, m) {
  m.doc() = "Real and complex speech enhancement networks: costs, DSP and training";

  m.def("preset_names", &preset_names);
  m.def("preset_text", &preset_text, py::arg("name"));
  m.def("suite_names", &suite_names);
  m.def("suite_members", &suite_members, py::arg("suite"));

  m.def("count", [](const std::string& model, double duration) {
    return report_dict(count_macs(*build_model(spec_of(model)), duration));
  }, py::arg("model"), py::arg("duration") = 1.0,
     "Parameters and MACs of a preset name or spec text over `duration` seconds.");
  m.def("cost_suite", [](const std::string& suite, double duration) {
    py::list out;
    for (const auto& r : cost_suite(suite, duration)) out.append(report_dict(r));
    return out;
  }, py::arg("suite"), py::arg("duration") = 1.0);
  m.def("cost_table", [](const std::string& suite, const std::string& format) {
    return emit_cost_table(cost_suite(suite), parse_table_format(format));
  }, py::arg("suite"), py::arg("format") = "csv");
  m.def("format_millions", &format_millions);
  m.def("format_macs", &format_macs);

  m.def("stft", [](const Array& wave, std::size_t window, std::size_t hop) {
    const auto x = to_vector(wave);
    const Spectrogram s = stft(x, framing_of(window, hop));
    py::array_t<std::complex<double>> out({s.frames(), s.framing.bins()});
    auto* p = out.mutable_data();
    for (std::size_t i = 0; i < s.bins.re.size(); ++i) p[i] = {s.bins.re[i], s.bins.im[i]};
    return out;
  }, py::arg("wave"), py::arg("window") = 512, py::arg("hop") = 128,
     "Complex [frames, bins] spectrogram; Hann window, centered reflect padding.");
  m.def("istft", [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& spec,
                    std::size_t length, std::size_t window, std::size_t hop) {
    if (spec.ndim() != 2) throw std::invalid_argument("expected a [frames, bins] array");
    const auto frames = static_cast<std::size_t>(spec.shape(0));
    const auto bins = static_cast<std::size_t>(spec.shape(1));
    Spectrogram s;
    s.framing = framing_of(window, hop);
    s.length = length;
    s.bins = ComplexPair(Tensor({frames, bins}), Tensor({frames, bins}));
    for (std::size_t i = 0; i < frames * bins; ++i) {
      s.bins.re[i] = spec.data()[i].real();
      s.bins.im[i] = spec.data()[i].imag();
    }
    return to_array(istft(s));
  }, py::arg("spec"), py::arg("length"), py::arg("window") = 512, py::arg("hop") = 128);

  m.def("si_sdr", [](const Array& est, const Array& ref) {
    return si_sdr(to_vector(est), to_vector(ref));
  }, py::arg("estimate"), py::arg("reference"));
  m.def("mix_at_snr", [](const Array& clean, const Array& noise, double snr_db) {
    const MixtureExample ex = mix_at_snr(to_vector(clean), to_vector(noise), snr_db);
    return py::make_tuple(to_array(ex.mixed), to_array(ex.noise));
  }, py::arg("clean"), py::arg("noise"), py::arg("snr_db"));
  m.def("synth_example", [](std::uint64_t seed, std::size_t index, double duration,
                            std::optional<double> snr_db) {
    const MixtureExample ex = synth_example(seed, index, duration, snr_db);
    py::dict d;
    d["clean"] = to_array(ex.clean);
    d["noise"] = to_array(ex.noise);
    d["mixed"] = to_array(ex.mixed);
    d["snr_db"] = ex.snr_db;
    return d;
  }, py::arg("seed"), py::arg("index"), py::arg("duration") = 1.0, py::arg("snr_db") = py::none());

  m.def("train", [](const std::string& config_text) {
    const auto runs = experiment_from_config(KeyValueConfig::parse(config_text, "<python>"));
    py::list out;
    std::vector<RunLog> logs;
    for (const auto& rc : runs) {
      TrainResult r = [&] {
        py::gil_scoped_release release;
        return train(rc);
      }();
      py::dict d;
      d["model"] = r.log.model;
      d["status"] = r.log.status;
      d["params"] = r.log.params;
      d["best_epoch"] = r.log.best_epoch;
      d["valid_sisdr"] = [&] {
        std::vector<double> v;
        for (const auto& e : r.log.epochs) v.push_back(e.valid_sisdr);
        return v;
      }();
      d["metrics"] = metrics_list(r.log.metrics);
      d["log"] = r.log.to_jsonl();
      out.append(d);
      logs.push_back(std::move(r.log));
    }
    py::dict result;
    result["runs"] = out;
    result["comparison"] = emit_comparison_table(logs, TableFormat::Csv);
    return result;
  }, py::arg("config"), "Train every model named by a run configuration text.");
}
