#include "pgpp/tal.hpp"

#include <algorithm>
#include <set>

#include "pgpp/error.hpp"

namespace pgpp {

bool Tal::contains(TaId ta) const { return std::find(ta_ids.begin(), ta_ids.end(), ta) != ta_ids.end(); }

Tal make_tal(TaId anchor, int length, const TrackingAreaMap& ta_map, Rng& rng, TalGrowth growth) {
  if (!ta_map.contains(anchor)) {
    throw Error(ErrorCode::unknown_tracking_area, "TAL anchor " + std::to_string(anchor) + " is not a known TA");
  }
  if (length < 1 || length > kMaxTalLength) {
    throw Error(ErrorCode::invalid_argument, "TAL length must be in 1..16, got " + std::to_string(length));
  }
  Tal tal{anchor, {anchor}};
  std::set<TaId> members{anchor};
  // Ordered set keeps the frontier enumeration, and so the draw, reproducible.
  std::set<TaId> frontier;
  for (TaId n : ta_map.neighbors(anchor)) frontier.insert(n);

  while (static_cast<int>(tal.ta_ids.size()) < length && !frontier.empty()) {
    auto pick = frontier.begin();
    std::advance(pick, static_cast<std::ptrdiff_t>(uniform_index(rng, frontier.size())));
    const TaId next = *pick;
    frontier.erase(pick);
    members.insert(next);
    tal.ta_ids.push_back(next);
    if (growth == TalGrowth::region_growing) {
      for (TaId n : ta_map.neighbors(next)) {
        if (!members.contains(n)) frontier.insert(n);
      }
    }
  }
  return tal;
}

bool is_valid_tal(const Tal& tal, const TrackingAreaMap& ta_map) {
  if (tal.ta_ids.empty() || tal.ta_ids.size() > static_cast<std::size_t>(kMaxTalLength)) return false;
  if (!tal.contains(tal.anchor)) return false;
  const std::set<TaId> members(tal.ta_ids.begin(), tal.ta_ids.end());
  if (members.size() != tal.ta_ids.size()) return false;
  for (TaId ta : members) {
    if (!ta_map.contains(ta)) return false;
  }
  // Flood fill from the anchor through members only.
  std::set<TaId> reached{tal.anchor};
  std::vector<TaId> stack{tal.anchor};
  while (!stack.empty()) {
    const TaId cur = stack.back();
    stack.pop_back();
    for (TaId n : ta_map.neighbors(cur)) {
      if (members.contains(n) && reached.insert(n).second) stack.push_back(n);
    }
  }
  return reached.size() == members.size();
}

}  // namespace pgpp
