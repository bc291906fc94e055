#pragma once

#include <optional>
#include <vector>

#include "pgpp/paging_sim.hpp"

namespace pgpp {

// A supportable-user figure; std::nullopt means unbounded (no load observed).
using SupportableUsers = std::optional<double>;

struct CapacityEstimate {
  double page_budget_per_hour = 0.0;
  // Hourly page load at the max, 95th percentile and median eNB.
  double load_max = 0.0;
  double load_p95 = 0.0;
  double load_median = 0.0;
  SupportableUsers users_max;
  SupportableUsers users_p95;
  SupportableUsers users_median;
};

inline constexpr double kDefaultPageBudgetPerSecond = 525.0;

double page_budget_per_hour(double pages_per_second);

// Linear estimate of the user population each eNB load level could carry:
// users(q) = population * budget / load(q). Loads are per-eNB page counts
// normalized to one hour; percentiles use linear interpolation over all eNBs
// in the report. Throws Error(invalid_argument) for a non-positive budget.
CapacityEstimate capacity_estimate(const SimReport& report, double page_budget_per_hour);

// Percentile with linear interpolation between closest ranks; `sorted` must be
// ascending and non-empty, q in [0, 1].
double percentile(const std::vector<double>& sorted, double q);

}  // namespace pgpp
