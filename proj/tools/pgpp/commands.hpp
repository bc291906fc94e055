#pragma once

#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pgpp/crypto.hpp"
#include "pgpp/gateway.hpp"

namespace pgpp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPartial = 3;

// Each register_* adds its subcommands; the callback stores the exit code.
void register_sim_commands(CLI::App& app, int& exit_code);
void register_token_commands(CLI::App& app, int& exit_code);
void register_gateway_commands(CLI::App& app, int& exit_code);
void register_aka_commands(CLI::App& app, int& exit_code);

std::string read_text(const std::filesystem::path& path);
Bytes read_binary(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_binary(const std::filesystem::path& path, std::span<const std::uint8_t> data);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

// Wallets ending in .bin use the binary form, everything else JSON.
struct WalletFileFormat {
  static bool is_binary(const std::filesystem::path& path) { return path.extension() == ".bin"; }
};

// Slice clock shared by `gateway serve` and `client authenticate`. Without an
// explicit start the period is the current UTC day.
struct ClockOptions {
  std::int64_t period_start = -1;
  std::int64_t slice_seconds = 3600;

  void add_to(CLI::App& cmd);
  gw::SliceClock resolve(std::int64_t now) const;
};

std::int64_t unix_now();

}  // namespace pgpp::cli
