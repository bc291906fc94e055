#include "pgpp/paging_log.hpp"

#include <algorithm>
#include <limits>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "pgpp/error.hpp"

namespace pgpp {

PagingLogAnalysis analyze_paging_log(std::span<const PagingLogEntry> log) {
  PagingLogAnalysis out;
  std::unordered_map<std::string, double> last_counted;
  double previous = -std::numeric_limits<double>::infinity();
  for (const PagingLogEntry& e : log) {
    if (e.timestamp < previous) throw Error(ErrorCode::invalid_argument, "paging log timestamps must not decrease");
    previous = e.timestamp;
    const auto it = last_counted.find(e.identifier);
    if (it == last_counted.end()) {
      last_counted.emplace(e.identifier, e.timestamp);
      out.page_counts[e.identifier] = 1;
      continue;
    }
    const double gap = e.timestamp - it->second;
    if (gap <= 1.0) continue;
    out.intervals.push_back(gap);
    it->second = e.timestamp;
    ++out.page_counts[e.identifier];
  }
  std::sort(out.intervals.begin(), out.intervals.end());
  return out;
}

std::vector<PagingLogEntry> emit_paging_log(const SimReport& report, IdentityModel identities) {
  std::vector<PagingLogEntry> log;
  log.reserve(report.page_records.size());
  for (const PageRecord& r : report.page_records) {
    std::string id = identities == IdentityModel::shared_imsi ? std::string(kSharedImsi)
                                                              : "00101" + std::to_string(1000000000ULL + r.target_ue);
    log.push_back(PagingLogEntry{static_cast<double>(r.tick) * report.config.tick_seconds, std::move(id)});
  }
  std::stable_sort(log.begin(), log.end(),
                   [](const PagingLogEntry& a, const PagingLogEntry& b) { return a.timestamp < b.timestamp; });
  return log;
}

std::vector<PagingLogEntry> read_paging_log_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<PagingLogEntry> log;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("timestamp", 0) == 0) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::parse, "paging log line " + std::to_string(line_no) + ": expected timestamp,identifier");
    }
    const std::string ts = line.substr(0, comma);
    char* end = nullptr;
    const double t = std::strtod(ts.c_str(), &end);
    if (ts.empty() || end != ts.c_str() + ts.size()) {
      throw Error(ErrorCode::parse, "paging log line " + std::to_string(line_no) + ": bad timestamp '" + ts + "'");
    }
    log.push_back(PagingLogEntry{t, line.substr(comma + 1)});
  }
  return log;
}

void write_paging_log_csv(std::ostream& out, std::span<const PagingLogEntry> log) {
  out << "timestamp,identifier\n";
  for (const PagingLogEntry& e : log) out << e.timestamp << ',' << e.identifier << '\n';
}

}  // namespace pgpp
