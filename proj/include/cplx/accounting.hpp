#pragma once

#include "cplx/models.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cplx {

struct CostEntry {
  std::string name;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
};

/// Per-layer and total cost of one model. `duration_s` is 0 for a params-only report.
struct CostReport {
  std::string model;
  std::vector<CostEntry> entries;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  Framing framing;
  double duration_s = 0.0;
  std::size_t frames = 0;
  std::vector<std::string> notes;
};

CostReport count_params(const Model& model);
/// Weight MACs over a signal of `duration_s` seconds. Throws std::invalid_argument when
/// `framing` differs from the model's framing or the duration is not positive.
CostReport count_macs(const Model& model, double duration_s, const Framing& framing);
inline CostReport count_macs(const Model& model, double duration_s = 1.0) {
  return count_macs(model, duration_s, model.framing());
}

enum class TableFormat { Csv, Markdown };
TableFormat parse_table_format(const std::string& s);

/// Columns: model, params, macs, window, hop, duration_s. Byte-stable for equal inputs.
std::string emit_cost_table(const std::vector<CostReport>& reports, TableFormat format);

/// "23.35 M" style rounding at two decimals.
std::string format_millions(std::uint64_t n);
/// "M" below one billion MACs, "G" above.
std::string format_macs(std::uint64_t n);
double round2(double x);

}  // namespace cplx
