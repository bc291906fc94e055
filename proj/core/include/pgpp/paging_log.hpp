#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pgpp/paging_sim.hpp"

namespace pgpp {

struct PagingLogEntry {
  double timestamp = 0.0;
  std::string identifier;
};

struct PagingLogAnalysis {
  std::map<std::string, std::uint64_t> page_counts;
  // Gaps between consecutive counted pages of the same identifier, ascending.
  std::vector<double> intervals;
};

// Pages of one identifier seen within one second of its last counted page
// collapse into that page. Throws Error(invalid_argument) if timestamps
// decrease.
PagingLogAnalysis analyze_paging_log(std::span<const PagingLogEntry> log);

enum class IdentityModel {
  // Every UE pages under its own IMSI.
  unique_imsi,
  // All UEs share one IMSI.
  shared_imsi,
};

inline constexpr const char* kSharedImsi = "001010000000001";

// Replays a simulation report as an over-the-air paging log.
std::vector<PagingLogEntry> emit_paging_log(const SimReport& report, IdentityModel identities);

// CSV `timestamp,identifier`.
std::vector<PagingLogEntry> read_paging_log_csv(std::istream& in);
void write_paging_log_csv(std::ostream& out, std::span<const PagingLogEntry> log);

}  // namespace pgpp
