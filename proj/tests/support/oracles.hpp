#pragma once

// Brute-force reference implementations used as test oracles. None of these
// share code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "pgpp/geo.hpp"
#include "pgpp/mobility.hpp"
#include "pgpp/paging_sim.hpp"
#include "pgpp/voronoi.hpp"

namespace oracle {

// Nearest site by linear scan; ties go to the lowest id.
inline pgpp::EnbId nearest_site(const std::vector<pgpp::SitePoint>& sites, pgpp::Point p) {
  pgpp::EnbId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : sites) {
    const double dx = s.position.x - p.x;
    const double dy = s.position.y - p.y;
    const double d = dx * dx + dy * dy;
    if (d < best_d * (1 - 1e-12) || (std::abs(d - best_d) <= best_d * 1e-12 && s.enb_id < best)) {
      best = s.enb_id;
      best_d = d;
    }
  }
  return best;
}

// Sites i and j share a Voronoi edge of positive length inside `region` iff
// the segment of their bisector that is closer to them than to every other
// site, clipped to the region, has positive length. Works on the bisector
// parameterization directly.
inline bool voronoi_neighbors(const std::vector<pgpp::SitePoint>& sites, std::size_t i, std::size_t j,
                              const pgpp::Rect& region, double min_length) {
  const pgpp::Point a = sites[i].position;
  const pgpp::Point b = sites[j].position;
  const pgpp::Point mid{(a.x + b.x) / 2, (a.y + b.y) / 2};
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const pgpp::Point dir{-(b.y - a.y) / len, (b.x - a.x) / len};
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  // Constraint c0 + c1 * t <= 0.
  auto clip = [&](double c0, double c1) {
    if (std::abs(c1) < 1e-15) {
      if (c0 > 0) {
        lo = 1;
        hi = 0;
      }
      return;
    }
    const double t = -c0 / c1;
    if (c1 > 0) {
      hi = std::min(hi, t);
    } else {
      lo = std::max(lo, t);
    }
  };
  clip(region.min_x - mid.x, -dir.x);
  clip(mid.x - region.max_x, dir.x);
  clip(region.min_y - mid.y, -dir.y);
  clip(mid.y - region.max_y, dir.y);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (k == i || k == j) continue;
    const pgpp::Point c = sites[k].position;
    // |p - a|^2 <= |p - c|^2  <=>  2 p.(c - a) <= |c|^2 - |a|^2
    const double gx = 2 * (c.x - a.x);
    const double gy = 2 * (c.y - a.y);
    const double rhs = (c.x * c.x + c.y * c.y) - (a.x * a.x + a.y * a.y);
    clip(gx * mid.x + gy * mid.y - rhs, gx * dir.x + gy * dir.y);
  }
  return hi - lo > min_length;
}

// Sum of |enbs_paged| recomputed from the TA map and broadcast lists.
inline std::map<pgpp::EnbId, std::uint64_t> recount_pages(const pgpp::SimReport& report,
                                                          const pgpp::TrackingAreaMap& ta_map) {
  std::map<pgpp::EnbId, std::uint64_t> out;
  for (const auto& [ta, members] : ta_map.tas()) {
    for (auto e : members) out[e] = 0;
  }
  for (const auto& r : report.page_records) {
    std::set<pgpp::EnbId> paged;
    for (auto ta : r.broadcast_tas) {
      for (auto e : ta_map.members(ta)) paged.insert(e);
    }
    for (auto e : paged) ++out[e];
  }
  return out;
}

// Mean UEs per occupied (eNB, tick), straight from timelines.
inline double mean_users_per_occupied_enb(const std::vector<pgpp::AttachmentTimeline>& timelines) {
  std::map<std::pair<std::int64_t, pgpp::EnbId>, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& t : timelines) {
    for (const auto& a : t.attachments) {
      ++counts[{a.tick, a.enb_id}];
      ++total;
    }
  }
  return static_cast<double>(total) / static_cast<double>(counts.size());
}

// Independent SQN ledger: UEs attach one after another, each SIM starting at
// SQN 0, against one shared HSS counter that advances once per completed
// attach. A UE whose SQN is not within `window` of the HSS value fails once,
// resynchronizes and then completes. Returns failures per UE in attach order.
inline std::vector<int> sqn_ledger_failures(std::size_t n, std::uint64_t window = 0) {
  std::uint64_t hss = 0;
  std::vector<int> failures;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t ue = 0;
    failures.push_back(hss - ue <= window ? 0 : 1);
    ++hss;
  }
  return failures;
}

}  // namespace oracle
