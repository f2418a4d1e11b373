#pragma once

#include "cplx/accounting.hpp"
#include "cplx/config.hpp"
#include "cplx/model_spec.hpp"

#include <string>
#include <vector>

namespace cplx {

/// Names of the compiled-in configurations, sorted.
std::vector<std::string> preset_names();
bool has_preset(const std::string& name);
/// Raw text of a compiled-in configuration. Throws std::invalid_argument for unknown names.
const std::string& preset_text(const std::string& name);
KeyValueConfig preset_config(const std::string& name);
ModelSpec preset_spec(const std::string& name);

/// Cost suites: table1, table2, table3, table5.
std::vector<std::string> suite_names();
std::vector<std::string> suite_members(const std::string& suite);
std::vector<CostReport> cost_suite(const std::string& suite, double duration_s = 1.0);

/// A real model and its complex counterpart sized to (near) equal parameter counts.
struct PresetPair {
  std::string name;
  std::string real;
  std::string complex;
};
std::vector<PresetPair> preset_pairs();

}  // namespace cplx
