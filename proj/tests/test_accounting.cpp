#include "cplx/accounting.hpp"
#include "cplx/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace cplx;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const CostReport& find(const std::vector<CostReport>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.model == name) return r;
  throw std::runtime_error("no report for " + name);
}

}  // namespace

TEST_CASE("table1 costs at two-decimal precision") {
  const auto rs = cost_suite("table1");
  REQUIRE(rs.size() == 7);
  struct Row {
    const char* name;
    const char* params;
    const char* macs;
  };
  for (const Row& row : {Row{"c_lstm", "23.35 M", "5.88 G"}, Row{"quasi_c_lstm", "23.35 M", "5.88 G"},
                         Row{"lstm", "23.62 M", "2.97 G"}, Row{"c_linear", "0.59 M", "119.41 M"},
                         Row{"r_linear", "0.59 M", "59.78 M"}, Row{"dcunet", "3.10 M", "56.88 G"}}) {
    CAPTURE(row.name);
    const CostReport& r = find(rs, row.name);
    CHECK(format_millions(r.params) == row.params);
    CHECK(format_macs(r.macs) == row.macs);
  }
}

TEST_CASE("gcrn component variants") {
  const auto rs = cost_suite("table2");
  const auto& a = find(rs, "gcrn_2a");
  const auto& b = find(rs, "gcrn_2b");
  CHECK(a.params == b.params);
  CHECK(double(b.macs) / double(a.macs) == doctest::Approx(1.495).epsilon(0.01));
  CHECK(format_millions(find(rs, "gcrn_2d").params) == format_millions(find(rs, "gcrn_2c").params));
}

TEST_CASE("MACs scale with the frame count") {
  for (const char* name : {"c_lstm", "r_linear", "gcrn_2a", "dccrn"}) {
    CAPTURE(name);
    auto m = build_model(preset_spec(name));
    const CostReport one = count_macs(*m, 1.0);
    const CostReport two = count_macs(*m, 2.0);
    CHECK(two.frames == m->framing().frames_for_duration(2.0));
    // cost per frame is constant, so macs * frames cross-multiplies exactly
    CHECK(two.macs * one.frames == one.macs * two.frames);
    CHECK(two.params == one.params);
  }
}

TEST_CASE("report totals are the sum of the entries") {
  for (const auto& r : cost_suite("table3")) {
    std::uint64_t p = 0, macs = 0;
    for (const auto& e : r.entries) {
      p += e.params;
      macs += e.macs;
    }
    CHECK(p == r.params);
    CHECK(macs == r.macs);
    CHECK(r.params == build_model(preset_spec(r.model))->param_count());
  }
}

TEST_CASE("params-only report carries no MACs") {
  auto m = build_model(preset_spec("cgcrn_s"));
  const CostReport r = count_params(*m);
  CHECK(r.macs == 0);
  CHECK(r.duration_s == 0.0);
  CHECK(r.params == m->param_count());
}

TEST_CASE("cost tables are byte-stable and match the golden file") {
  const std::string a = emit_cost_table(cost_suite("table1"), TableFormat::Csv);
  const std::string b = emit_cost_table(cost_suite("table1"), TableFormat::Csv);
  CHECK(a == b);
  CHECK(a == read_text(CPLX_GOLDEN_DIR "/table1.csv"));
  const std::string md = emit_cost_table(cost_suite("table1"), TableFormat::Markdown);
  CHECK(md.find("| c_lstm | 23.35 M | 5.88 G | 512 | 128 | 1 |") != std::string::npos);
}

TEST_CASE("invalid accounting requests throw") {
  auto m = build_model(preset_spec("r_linear"));
  CHECK_THROWS_AS(count_macs(*m, 1.0, Framing{16000, 512, 128}), std::invalid_argument);
  CHECK_THROWS_AS(count_macs(*m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(count_macs(*m, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_table_format("xml"), std::invalid_argument);
  CHECK_THROWS_AS(cost_suite("table9"), std::invalid_argument);
  CHECK_THROWS_AS(emit_cost_table({}, TableFormat::Csv), std::invalid_argument);
}

TEST_CASE("number formatting") {
  CHECK(format_millions(23349850) == "23.35 M");
  CHECK(format_macs(119409472) == "119.41 M");
  CHECK(format_macs(5875178400ULL) == "5.88 G");
  CHECK(round2(3.14159) == 3.14);
}

TEST_CASE("shipped real/complex pairs are parameter-matched and the complex side costs more") {
  for (const auto& pair : preset_pairs()) {
    CAPTURE(pair.name);
    auto real = build_model(preset_spec(pair.real));
    auto cx = build_model(preset_spec(pair.complex));
    const double pr = static_cast<double>(real->param_count());
    const double pc = static_cast<double>(cx->param_count());
    CHECK(std::fabs(pr - pc) <= 0.01 * std::max(pr, pc));
    CHECK(count_macs(*cx).macs > count_macs(*real).macs);
  }
}
