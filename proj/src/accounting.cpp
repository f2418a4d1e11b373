#include "cplx/accounting.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cplx {

namespace {

const char* kNotes[] = {
    "MACs count weight multiply-accumulates only; biases, activations, gates and masks are free",
    "a complex multiply-accumulate counts as 4 real MACs",
    "transposed convolutions count kernel taps per output position",
    "recurrent layers are counted once per frame",
    "frames = 1 + floor(samples / hop), centered framing",
};

std::uint64_t slot_macs(const LayerSlot& slot, std::size_t frames) {
  Shape in = slot.input;
  Shape out = slot.output;
  in[slot.time_axis] = frames;
  out[slot.time_axis] = frames;
  if (auto* conv = dynamic_cast<const ConvLayer*>(slot.layer)) return conv->mac_count(in, out);
  if (auto* glu = dynamic_cast<const GluLayer*>(slot.layer)) return glu->mac_count(in, out);
  return slot.layer->mac_count(in);
}

std::string fmt_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

double round2(double x) { return std::round(x * 100.0) / 100.0; }

std::string format_millions(std::uint64_t n) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f M", static_cast<double>(n) / 1e6);
  return buf;
}

std::string format_macs(std::uint64_t n) {
  char buf[48];
  if (n >= 1000000000ULL) {
    std::snprintf(buf, sizeof buf, "%.2f G", static_cast<double>(n) / 1e9);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f M", static_cast<double>(n) / 1e6);
  }
  return buf;
}

CostReport count_params(const Model& model) {
  CostReport r;
  r.model = model.spec().name;
  r.framing = model.framing();
  for (const auto& slot : model.slots()) {
    r.entries.push_back({slot.name, slot.layer->param_count(), 0});
    r.params += slot.layer->param_count();
  }
  if (r.params != model.param_count()) {
    throw std::logic_error("model " + r.model + ": layer slots do not cover every parameter");
  }
  r.notes.assign(std::begin(kNotes), std::end(kNotes));
  return r;
}

CostReport count_macs(const Model& model, double duration_s, const Framing& framing) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("count_macs: duration must be positive");
  if (!(framing == model.framing())) {
    throw std::invalid_argument("count_macs: framing " + std::to_string(framing.window_len) + "/" +
                                std::to_string(framing.hop) + " does not match model " +
                                model.spec().name + " (" +
                                std::to_string(model.framing().window_len) + "/" +
                                std::to_string(model.framing().hop) + ")");
  }
  CostReport r = count_params(model);
  r.duration_s = duration_s;
  r.frames = framing.frames_for_duration(duration_s);
  const auto& slots = model.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    r.entries[i].macs = slot_macs(slots[i], r.frames);
    r.macs += r.entries[i].macs;
  }
  return r;
}

TableFormat parse_table_format(const std::string& s) {
  if (s == "csv") return TableFormat::Csv;
  if (s == "markdown" || s == "md") return TableFormat::Markdown;
  throw std::invalid_argument("unknown table format '" + s + "' (expected csv or markdown)");
}

std::string emit_cost_table(const std::vector<CostReport>& reports, TableFormat format) {
  if (reports.empty()) throw std::invalid_argument("emit_cost_table: no reports");
  std::string out;
  if (format == TableFormat::Csv) {
    out = "model,params,macs,window,hop,duration_s\n";
    for (const auto& r : reports) {
      out += r.model + "," + std::to_string(r.params) + "," + std::to_string(r.macs) + "," +
             std::to_string(r.framing.window_len) + "," + std::to_string(r.framing.hop) + "," +
             fmt_double(r.duration_s) + "\n";
    }
    return out;
  }
  out = "| model | params | macs | window | hop | duration_s |\n";
  out += "|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : reports) {
    out += "| " + r.model + " | " + format_millions(r.params) + " | " + format_macs(r.macs) +
           " | " + std::to_string(r.framing.window_len) + " | " + std::to_string(r.framing.hop) +
           " | " + fmt_double(r.duration_s) + " |\n";
  }
  return out;
}

}  // namespace cplx
