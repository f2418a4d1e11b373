#include "cplx/presets.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string_view>

namespace cplx {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_configs();
}

namespace {

const std::map<std::string, std::string>& table() {
  static const std::map<std::string, std::string> t = [] {
    std::map<std::string, std::string> m;
    for (const auto& [name, text] : detail::embedded_configs()) m.emplace(name, text);
    return m;
  }();
  return t;
}

const std::map<std::string, std::vector<std::string>>& suites() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"table1", {"c_lstm", "quasi_c_lstm", "lstm", "c_linear", "r_linear", "dcunet", "runet"}},
      {"table2",
       {"gcrn_2a", "gcrn_2b", "gcrn_2c", "gcrn_2d", "gcrn_2e", "gcrn_2f", "gcrn_2g", "gcrn_2h",
        "gcrn_2i", "gcrn_2j", "gcrn_2a_crm", "gcrn_2j_crm"}},
      {"table3", {"cgcrn_m", "gcrn_m", "cgcrn_s", "gcrn_s"}},
      {"table5", {"dccrn", "dccrn_real"}},
  };
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : table()) out.push_back(k);
  return out;
}

bool has_preset(const std::string& name) { return table().count(name) > 0; }

const std::string& preset_text(const std::string& name) {
  auto it = table().find(name);
  if (it == table().end()) throw std::invalid_argument("unknown preset '" + name + "'");
  return it->second;
}

KeyValueConfig preset_config(const std::string& name) {
  return KeyValueConfig::parse(preset_text(name), "preset:" + name);
}

ModelSpec preset_spec(const std::string& name) { return ModelSpec::from_config(preset_config(name)); }

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : suites()) out.push_back(k);
  return out;
}

std::vector<std::string> suite_members(const std::string& suite) {
  auto it = suites().find(suite);
  if (it == suites().end()) {
    std::string known;
    for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset suite '" + suite + "' (known: " + known + ")");
  }
  return it->second;
}

std::vector<CostReport> cost_suite(const std::string& suite, double duration_s) {
  std::vector<CostReport> out;
  for (const auto& name : suite_members(suite)) {
    auto model = build_model(preset_spec(name));
    out.push_back(count_macs(*model, duration_s));
  }
  return out;
}

// gcrn_s/cgcrn_s and gcrn_m/cgcrn_m reproduce published sizes about 4% apart, so they
// are cost presets only, not parity pairs.
std::vector<PresetPair> preset_pairs() {
  return {
      {"gcrn_s_crm", "gcrn_s_crm", "cgcrn_s_crm"},
      {"unet", "runet", "dcunet"},
      {"dccrn", "dccrn_real", "dccrn"},
  };
}

}  // namespace cplx
