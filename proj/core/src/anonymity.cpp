#include "pgpp/anonymity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pgpp/capacity.hpp"
#include "pgpp/error.hpp"

namespace pgpp {

double degree_of_anonymity(double set_size, double population) {
  if (!(population >= 2.0)) throw Error(ErrorCode::domain, "degree of anonymity needs N >= 2");
  if (!(set_size >= 1.0) || set_size > population) {
    throw Error(ErrorCode::domain, "degree of anonymity needs 1 <= S <= N");
  }
  return std::log2(set_size) / std::log2(population);
}

double global_bulk_anonymity(const SimReport& report, double population) {
  if (report.page_records.empty()) throw Error(ErrorCode::empty_input, "report has no page records");
  // Unique IMSIs pin the victim to a single candidate.
  if (report.config.mode == PagingMode::conventional) return 0.0;
  std::vector<double> sizes;
  sizes.reserve(report.page_records.size());
  for (const PageRecord& r : report.page_records) sizes.push_back(static_cast<double>(r.enbs_with_users));
  std::sort(sizes.begin(), sizes.end());
  const double s = std::max(1.0, percentile(sizes, 0.5));
  return degree_of_anonymity(s, population);
}

double local_bulk_anonymity(const SimReport& report, double population) {
  if (report.occupied_enb_ticks == 0) throw Error(ErrorCode::empty_input, "report has no attachments");
  const double s = static_cast<double>(report.attached_ue_ticks) / static_cast<double>(report.occupied_enb_ticks);
  return degree_of_anonymity(s, population);
}

AreaReport area_anonymity(const SimReport& report, const std::unordered_map<EnbId, Point>& positions) {
  AreaReport out;
  out.areas_km2.reserve(report.page_records.size());
  for (const PageRecord& r : report.page_records) {
    double min_x = std::numeric_limits<double>::max();
    double min_y = std::numeric_limits<double>::max();
    double max_x = std::numeric_limits<double>::lowest();
    double max_y = std::numeric_limits<double>::lowest();
    for (EnbId e : r.enbs_paged) {
      const auto it = positions.find(e);
      if (it == positions.end()) {
        throw Error(ErrorCode::invalid_argument, "no position for eNB " + std::to_string(e));
      }
      min_x = std::min(min_x, it->second.x);
      min_y = std::min(min_y, it->second.y);
      max_x = std::max(max_x, it->second.x);
      max_y = std::max(max_y, it->second.y);
    }
    const double area = r.enbs_paged.empty() ? 0.0 : (max_x - min_x) * (max_y - min_y) / 1e6;
    out.areas_km2.push_back(area);
  }
  if (!out.areas_km2.empty()) {
    std::vector<double> sorted = out.areas_km2;
    std::sort(sorted.begin(), sorted.end());
    out.median_km2 = percentile(sorted, 0.50);
    out.p25_km2 = percentile(sorted, 0.25);
    out.p75_km2 = percentile(sorted, 0.75);
    out.p95_km2 = percentile(sorted, 0.95);
    out.max_km2 = sorted.back();
  }
  return out;
}

}  // namespace pgpp
