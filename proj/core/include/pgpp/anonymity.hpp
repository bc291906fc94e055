#pragma once

#include <unordered_map>
#include <vector>

#include "pgpp/geo.hpp"
#include "pgpp/paging_sim.hpp"

namespace pgpp {

// Normalized entropy of an anonymity set: log2(S) / log2(N). S may be a real
// valued mean. Throws Error(domain) unless N >= 2 and 1 <= S <= N.
double degree_of_anonymity(double set_size, double population);

// Global-bulk attacker: the victim may sit at any paged eNB with at least one
// user. S is the median of enbs_with_users over page records; conventional
// networks give 0 since every IMSI is unique. Throws Error(empty_input) for a
// report without pages.
double global_bulk_anonymity(const SimReport& report, double population);

// Local-bulk attacker: S is the mean number of attached UEs over (eNB, tick)
// pairs with at least one UE. Throws Error(empty_input) if nothing attached.
double local_bulk_anonymity(const SimReport& report, double population);

struct AreaReport {
  // One entry per page record, km^2.
  std::vector<double> areas_km2;
  double median_km2 = 0.0;
  double p25_km2 = 0.0;
  double p75_km2 = 0.0;
  double p95_km2 = 0.0;
  double max_km2 = 0.0;
};

// Local-targeted attacker: area of the axis-aligned bounding box around the
// paged eNBs of each page.
AreaReport area_anonymity(const SimReport& report, const std::unordered_map<EnbId, Point>& positions);

}  // namespace pgpp
