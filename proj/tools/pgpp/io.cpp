#include <chrono>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "pgpp/error.hpp"

namespace pgpp::cli {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::config, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Bytes read_binary(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  return Bytes(text.begin(), text.end());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
}

void write_binary(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  write_text(path, std::string(data.begin(), data.end()));
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + '\n');
}

void ClockOptions::add_to(CLI::App& cmd) {
  cmd.add_option("--period-start", period_start, "Unix time the billing period starts (default: today 00:00 UTC)");
  cmd.add_option("--slice-seconds", slice_seconds, "Length of one time slice")->check(CLI::PositiveNumber);
}

gw::SliceClock ClockOptions::resolve(std::int64_t now) const {
  gw::SliceClock clock;
  clock.slice_seconds = slice_seconds;
  clock.period_start = period_start >= 0 ? period_start : now - now % 86400;
  return clock;
}

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace pgpp::cli
