#include "pgpp/capacity.hpp"

#include <algorithm>
#include <cmath>

#include "pgpp/error.hpp"

namespace pgpp {

double page_budget_per_hour(double pages_per_second) { return pages_per_second * 3600.0; }

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::empty_input, "percentile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

CapacityEstimate capacity_estimate(const SimReport& report, double budget_per_hour) {
  if (!(budget_per_hour > 0.0)) throw Error(ErrorCode::invalid_argument, "page budget must be positive");
  CapacityEstimate est;
  est.page_budget_per_hour = budget_per_hour;
  if (report.per_enb_pages.empty() || report.duration_ticks <= 0) return est;

  const double to_hourly = 3600.0 / report.duration_seconds();
  std::vector<double> loads;
  loads.reserve(report.per_enb_pages.size());
  for (const auto& [enb, pages] : report.per_enb_pages) loads.push_back(static_cast<double>(pages) * to_hourly);
  std::sort(loads.begin(), loads.end());

  est.load_max = loads.back();
  est.load_p95 = percentile(loads, 0.95);
  est.load_median = percentile(loads, 0.50);

  const double population = static_cast<double>(report.population);
  auto users = [&](double load) -> SupportableUsers {
    if (!(load > 0.0)) return std::nullopt;
    return population * budget_per_hour / load;
  };
  est.users_max = users(est.load_max);
  est.users_p95 = users(est.load_p95);
  est.users_median = users(est.load_median);
  return est;
}

}  // namespace pgpp
