#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pgpp/mobility.hpp"
#include "pgpp/tal.hpp"
#include "pgpp/topology.hpp"

namespace pgpp {

enum class PagingMode { conventional, tal };

std::string_view to_string(PagingMode mode);
PagingMode parse_paging_mode(std::string_view text);

struct TrafficConfig {
  double call_fraction = 0.05;
  std::int64_t call_duration_ticks = 36;
};

struct SimConfig {
  PagingMode mode = PagingMode::conventional;
  int tal_length = 1;
  TalGrowth tal_growth = TalGrowth::region_growing;
  TrafficConfig traffic;
  double tick_seconds = kTickSeconds;
  std::uint64_t seed = 1;
};

struct PageRecord {
  std::int64_t tick = 0;
  UeId target_ue = 0;
  std::vector<TaId> broadcast_tas;
  // Union of the members of broadcast_tas, ascending.
  std::vector<EnbId> enbs_paged;
  // Paged eNBs with at least one attached UE at this tick.
  std::uint32_t enbs_with_users = 0;
};

struct SimReport {
  SimConfig config;
  std::string ta_map_id;
  std::int64_t first_tick = 0;
  std::int64_t duration_ticks = 0;
  std::size_t population = 0;
  // Every eNB of the TA map, including those never paged.
  std::map<EnbId, std::uint64_t> per_enb_pages;
  std::vector<PageRecord> page_records;
  // Occupancy totals over all (eNB, tick) pairs with at least one attached UE.
  std::uint64_t occupied_enb_ticks = 0;
  std::uint64_t attached_ue_ticks = 0;
  std::uint64_t tal_updates = 0;

  std::uint64_t total_pages() const;
  double duration_seconds() const { return static_cast<double>(duration_ticks) * config.tick_seconds; }
};

// Discrete-event paging simulation.
//
// Each tick draws floor(call_fraction * N) distinct UEs; a drawn UE that is not
// already in a call is paged and stays busy for call_duration_ticks. Pages
// fan out to the UE's current TA (conventional) or its current TAL. In TAL
// mode every UE gets a fresh TAL at the first tick and a new one whenever it
// moves to a TA outside its list. Call draws and TAL growth use separate RNG
// streams, so different modes with the same seed page the same UEs at the
// same ticks.
//
// Throws Error(inconsistent_ticks) if timelines do not share one contiguous
// tick range, Error(invalid_argument) for an out-of-range fraction or TAL
// length.
SimReport run_sim(std::span<const AttachmentTimeline> timelines, const TrackingAreaMap& ta_map,
                  const SimConfig& config);

}  // namespace pgpp
