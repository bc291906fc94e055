#pragma once

#include <vector>

#include "pgpp/rng.hpp"
#include "pgpp/topology.hpp"

namespace pgpp {

inline constexpr int kMaxTalLength = 16;

// Tracking area list: the anchor (the UE's TA when the list was issued)
// followed by the randomly grown members.
struct Tal {
  TaId anchor = 0;
  std::vector<TaId> ta_ids;

  bool contains(TaId ta) const;
  std::size_t size() const { return ta_ids.size(); }
};

enum class TalGrowth {
  // Next member is drawn from TAs adjacent to any current member.
  region_growing,
  // Next member is drawn from TAs adjacent to the anchor only.
  anchor_adjacent,
};

// Grows a TAL of up to `length` members from `anchor`, one uniformly random
// frontier TA at a time; stops early when the frontier is empty. Throws
// Error(unknown_tracking_area) for an unknown anchor and
// Error(invalid_argument) for a length outside 1..16.
Tal make_tal(TaId anchor, int length, const TrackingAreaMap& ta_map, Rng& rng,
             TalGrowth growth = TalGrowth::region_growing);

// Checks anchor membership, uniqueness, size bound and that every member is
// reachable from the anchor through members.
bool is_valid_tal(const Tal& tal, const TrackingAreaMap& ta_map);

}  // namespace pgpp
