#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pgpp {

// Flat `key = value` configuration with `#` comments. Values may be quoted;
// lists are comma separated. Unknown keys are kept so callers can reject
// them.
class KvConfig {
 public:
  static KvConfig parse(std::istream& in);
  static KvConfig parse_string(std::string_view text);
  static KvConfig load(const std::string& path);

  bool has(std::string_view key) const;
  void set(std::string key, std::string value);

  std::string get_string(std::string_view key, std::string fallback = {}) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  double get_double(std::string_view key, double fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<std::string> get_list(std::string_view key) const;
  std::vector<std::int64_t> get_int_list(std::string_view key) const;

  // Keys not in `known`, for strict validation.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

  // Canonical text: sorted keys, one per line.
  std::string to_string() const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

}  // namespace pgpp
