#include "pgpp/paging_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "pgpp/error.hpp"
#include "pgpp/rng.hpp"

namespace pgpp {

std::string_view to_string(PagingMode mode) { return mode == PagingMode::conventional ? "conventional" : "tal"; }

PagingMode parse_paging_mode(std::string_view text) {
  if (text == "conventional") return PagingMode::conventional;
  if (text == "tal") return PagingMode::tal;
  throw Error(ErrorCode::parse, "unknown paging mode '" + std::string(text) + "'");
}

std::uint64_t SimReport::total_pages() const {
  std::uint64_t total = 0;
  for (const auto& [enb, pages] : per_enb_pages) total += pages;
  return total;
}

namespace {

void check_timelines(std::span<const AttachmentTimeline> timelines, std::int64_t& first, std::int64_t& length) {
  first = 0;
  length = 0;
  if (timelines.empty()) return;
  const auto& ref = timelines.front().attachments;
  if (ref.empty()) throw Error(ErrorCode::inconsistent_ticks, "UE " + std::to_string(timelines.front().ue_id) + " has no ticks");
  first = ref.front().tick;
  length = static_cast<std::int64_t>(ref.size());
  for (const AttachmentTimeline& t : timelines) {
    if (static_cast<std::int64_t>(t.attachments.size()) != length) {
      throw Error(ErrorCode::inconsistent_ticks, "UE " + std::to_string(t.ue_id) + " covers " +
                                                     std::to_string(t.attachments.size()) + " ticks, expected " +
                                                     std::to_string(length));
    }
    for (std::int64_t k = 0; k < length; ++k) {
      if (t.attachments[static_cast<std::size_t>(k)].tick != first + k) {
        throw Error(ErrorCode::inconsistent_ticks,
                    "UE " + std::to_string(t.ue_id) + " has a gap or offset at position " + std::to_string(k));
      }
    }
  }
}

}  // namespace

SimReport run_sim(std::span<const AttachmentTimeline> timelines, const TrackingAreaMap& ta_map,
                  const SimConfig& config) {
  if (!(config.traffic.call_fraction >= 0.0 && config.traffic.call_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "call_fraction must be in [0, 1]");
  }
  if (config.traffic.call_duration_ticks < 1) {
    throw Error(ErrorCode::invalid_argument, "call_duration_ticks must be >= 1");
  }
  if (config.mode == PagingMode::tal && (config.tal_length < 1 || config.tal_length > kMaxTalLength)) {
    throw Error(ErrorCode::invalid_argument, "tal_length must be in 1..16");
  }

  SimReport report;
  report.config = config;
  report.ta_map_id = ta_map.fingerprint();
  check_timelines(timelines, report.first_tick, report.duration_ticks);
  report.population = timelines.size();

  // Dense eNB indices for per-tick occupancy.
  std::unordered_map<EnbId, std::size_t> enb_index;
  std::vector<EnbId> enb_ids;
  for (const auto& [ta, members] : ta_map.tas()) {
    for (EnbId e : members) {
      enb_index.emplace(e, enb_ids.size());
      enb_ids.push_back(e);
      report.per_enb_pages.emplace(e, 0);
    }
  }
  std::vector<std::uint64_t> pages(enb_ids.size(), 0);
  std::vector<std::uint32_t> occupancy(enb_ids.size(), 0);

  const std::size_t n = timelines.size();
  const auto draws = static_cast<std::size_t>(std::floor(config.traffic.call_fraction * static_cast<double>(n) + 1e-9));
  Rng traffic_rng(derive_seed(config.seed, "traffic"));
  Rng tal_rng(derive_seed(config.seed, "tal"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::int64_t> busy_until(n, std::numeric_limits<std::int64_t>::min());
  std::vector<Tal> tals(config.mode == PagingMode::tal ? n : 0);
  std::vector<std::size_t> current_enb(n, 0);

  for (std::int64_t k = 0; k < report.duration_ticks; ++k) {
    const std::int64_t tick = report.first_tick + k;
    std::fill(occupancy.begin(), occupancy.end(), 0U);
    for (std::size_t u = 0; u < n; ++u) {
      const Attachment& a = timelines[u].attachments[static_cast<std::size_t>(k)];
      const auto it = enb_index.find(a.enb_id);
      if (it == enb_index.end()) {
        throw Error(ErrorCode::unknown_tracking_area, "eNB " + std::to_string(a.enb_id) + " not in TA map");
      }
      current_enb[u] = it->second;
      ++occupancy[it->second];
      if (config.mode == PagingMode::tal) {
        if (k == 0) {
          tals[u] = make_tal(a.ta_id, config.tal_length, ta_map, tal_rng, config.tal_growth);
        } else if (!tals[u].contains(a.ta_id)) {
          tals[u] = make_tal(a.ta_id, config.tal_length, ta_map, tal_rng, config.tal_growth);
          ++report.tal_updates;
        }
      }
    }
    for (std::uint32_t c : occupancy) {
      if (c > 0) ++report.occupied_enb_ticks;
    }
    report.attached_ue_ticks += n;

    for (std::size_t d = 0; d < draws; ++d) {
      const std::size_t j = d + static_cast<std::size_t>(uniform_index(traffic_rng, n - d));
      std::swap(order[d], order[j]);
      const std::size_t u = order[d];
      if (busy_until[u] > tick) continue;
      busy_until[u] = tick + config.traffic.call_duration_ticks;

      PageRecord record;
      record.tick = tick;
      record.target_ue = timelines[u].ue_id;
      const TaId current_ta = timelines[u].attachments[static_cast<std::size_t>(k)].ta_id;
      if (config.mode == PagingMode::conventional) {
        record.broadcast_tas = {current_ta};
      } else {
        record.broadcast_tas = tals[u].ta_ids;
      }
      for (TaId ta : record.broadcast_tas) {
        const auto& members = ta_map.members(ta);
        record.enbs_paged.insert(record.enbs_paged.end(), members.begin(), members.end());
      }
      std::sort(record.enbs_paged.begin(), record.enbs_paged.end());
      for (EnbId e : record.enbs_paged) {
        const std::size_t idx = enb_index.at(e);
        ++pages[idx];
        if (occupancy[idx] > 0) ++record.enbs_with_users;
      }
      report.page_records.push_back(std::move(record));
    }
  }

  for (std::size_t i = 0; i < enb_ids.size(); ++i) report.per_enb_pages[enb_ids[i]] = pages[i];
  return report;
}

}  // namespace pgpp
