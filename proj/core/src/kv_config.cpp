#include "pgpp/kv_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "pgpp/error.hpp"

namespace pgpp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Strips a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::string unquote(std::string_view value, std::size_t line_no) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    return std::string(value.substr(1, value.size() - 2));
  }
  if (value.find('"') != std::string_view::npos) {
    throw Error(ErrorCode::config, "line " + std::to_string(line_no) + ": unbalanced quote");
  }
  return std::string(value);
}

}  // namespace

KvConfig KvConfig::parse(std::istream& in) {
  KvConfig out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(body.substr(0, eq)));
    if (key.empty()) throw Error(ErrorCode::config, "line " + std::to_string(line_no) + ": empty key");
    if (out.entries_.contains(key)) {
      throw Error(ErrorCode::config, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    out.entries_.emplace(key, unquote(trim(body.substr(eq + 1)), line_no));
  }
  return out;
}

KvConfig KvConfig::parse_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

KvConfig KvConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open config file " + path);
  return parse(in);
}

bool KvConfig::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

void KvConfig::set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }

std::string KvConfig::get_string(std::string_view key, std::string fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::int64_t KvConfig::get_int(std::string_view key, std::int64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::int64_t v = 0;
  const std::string& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::config, std::string(key) + ": expected an integer, got '" + s + "'");
  }
  return v;
}

double KvConfig::get_double(std::string_view key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  double v = 0;
  const std::string& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::config, std::string(key) + ": expected a number, got '" + s + "'");
  }
  return v;
}

bool KvConfig::get_bool(std::string_view key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorCode::config, std::string(key) + ": expected true or false, got '" + s + "'");
}

std::vector<std::string> KvConfig::get_list(std::string_view key) const {
  std::vector<std::string> out;
  const auto it = entries_.find(key);
  if (it == entries_.end()) return out;
  std::string_view rest = it->second;
  if (!rest.empty() && rest.front() == '[' && rest.back() == ']') rest = rest.substr(1, rest.size() - 2);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<std::int64_t> KvConfig::get_int_list(std::string_view key) const {
  std::vector<std::int64_t> out;
  for (const std::string& item : get_list(key)) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      throw Error(ErrorCode::config, std::string(key) + ": expected integers, got '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> KvConfig::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [key, value] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) out.push_back(key);
  }
  return out;
}

std::string KvConfig::to_string() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += " = ";
    const bool needs_quotes = value.empty() || value.find_first_of("#\t ") != std::string::npos;
    if (needs_quotes) out += '"';
    out += value;
    if (needs_quotes) out += '"';
    out += '\n';
  }
  return out;
}

}  // namespace pgpp
