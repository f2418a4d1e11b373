#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cplx {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `section.key = value` file. `#` starts a comment; blank lines are ignored.
/// Keys serialize in sorted order so equal configs produce equal text.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& source = "<config>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  std::size_t get_size(const std::string& key) const;
  std::size_t get_size_or(const std::string& key, std::size_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, double value);
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  void set(const std::string& key, const std::vector<std::size_t>& values);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }

  /// Entries whose key starts with `section.`.
  KeyValueConfig section(const std::string& name) const;
  /// Throws naming the first key under one of `sections` that is not in `known`.
  void reject_unknown(const std::set<std::string>& sections,
                      const std::set<std::string>& known) const;
  void merge(const KeyValueConfig& other);

  std::string serialize() const;
  std::vector<std::string> keys() const;
  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;

  std::map<std::string, Entry> entries_;
  std::string source_ = "<config>";
};

}  // namespace cplx
