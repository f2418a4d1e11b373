#include "cplx/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cplx {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(std::string_view key) {
  const auto dot = key.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == key.size()) return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) {
      throw ConfigError(where + "expected 'section.key = value', got '" + std::string(line) + "'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!valid_key(key)) throw ConfigError(where + "malformed key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    if (cfg.entries_.count(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    cfg.entries_[key] = {value, line_no};
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void KeyValueConfig::fail(const std::string& key, const std::string& why) const {
  auto it = entries_.find(key);
  std::string where = source_;
  if (it != entries_.end() && it->second.line) where += ":" + std::to_string(it->second.line);
  throw ConfigError(where + ": " + key + ": " + why);
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) fail(key, "missing required key");
  return it->second.value;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
  return out;
}

std::int64_t KeyValueConfig::get_int_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::size_t KeyValueConfig::get_size(const std::string& key) const {
  const auto v = get_int(key);
  if (v < 0) fail(key, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::size_t KeyValueConfig::get_size_or(const std::string& key, std::size_t fallback) const {
  return has(key) ? get_size(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, "expected a number, got '" + v + "'");
  return out;
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool KeyValueConfig::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

std::vector<std::size_t> KeyValueConfig::get_sizes(const std::string& key) const {
  const std::string& v = get(key);
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const std::string_view item =
        trim(std::string_view(v).substr(pos, comma == std::string::npos ? std::string::npos
                                                                         : comma - pos));
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      fail(key, "expected a comma-separated list of non-negative integers, got '" + v + "'");
    }
    out.push_back(n);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("malformed key '" + key + "'");
  entries_[key] = {value, 0};
}

void KeyValueConfig::set(const std::string& key, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  set(key, std::string(buf, ptr));
}

void KeyValueConfig::set(const std::string& key, const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(values[i]);
  }
  set(key, s);
}

KeyValueConfig KeyValueConfig::section(const std::string& name) const {
  KeyValueConfig out;
  out.source_ = source_;
  const std::string prefix = name + ".";
  for (const auto& [k, e] : entries_) {
    if (k.rfind(prefix, 0) == 0) out.entries_[k] = e;
  }
  return out;
}

void KeyValueConfig::reject_unknown(const std::set<std::string>& sections,
                                    const std::set<std::string>& known) const {
  for (const auto& [k, e] : entries_) {
    const std::string sec = k.substr(0, k.find('.'));
    if (sections.count(sec) && !known.count(k)) fail(k, "unknown key");
  }
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, e] : other.entries_) entries_[k] = e;
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [k, e] : entries_) out += k + " = " + e.value + "\n";
  return out;
}

std::vector<std::string> KeyValueConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) out.push_back(k);
  return out;
}

}  // namespace cplx
