#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "pgpp/geo.hpp"
#include "pgpp/topology.hpp"
#include "pgpp/voronoi.hpp"

namespace pgpp {

using UeId = std::uint64_t;

inline constexpr double kTickSeconds = 5.0;

enum class Profile { car, pedestrian };

std::string_view to_string(Profile profile);
Profile parse_profile(std::string_view text);

struct ProfileSpeed {
  double mean_mps;
  // Per-tick speed is mean * U(1 - jitter, 1 + jitter).
  double jitter;
  double cap_mps;
};

ProfileSpeed speed_of(Profile profile);

struct TraceSample {
  std::int64_t tick = 0;
  Point position;
};

struct MobilityTrace {
  UeId ue_id = 0;
  Profile profile = Profile::pedestrian;
  std::vector<TraceSample> samples;
};

struct Attachment {
  std::int64_t tick = 0;
  EnbId enb_id = 0;
  TaId ta_id = 0;
};

struct AttachmentTimeline {
  UeId ue_id = 0;
  std::vector<Attachment> attachments;
};

struct TraceSynthConfig {
  std::size_t n_cars = 0;
  std::size_t n_pedestrians = 0;
  std::int64_t duration_ticks = 720;
  std::uint64_t seed = 1;
};

// Seeded random-waypoint traces: each UE walks or drives a straight line from
// a random start to a random end inside `bounds`, one sample per 5 s tick,
// and holds its final position after arriving. Cars get ids [0, n_cars),
// pedestrians follow. Each UE has its own RNG stream.
std::vector<MobilityTrace> synth_traces(const Rect& bounds, const TraceSynthConfig& config);

// Per-tick eNB and TA for one trace. Throws Error(out_of_region) naming the
// UE and tick of the first sample outside the locator's region.
AttachmentTimeline attach_timeline(const MobilityTrace& trace, const CellLocator& locator,
                                   const TrackingAreaMap& ta_map);

// Re-labels the TA of every attachment using another TA map over the same eNBs.
AttachmentTimeline relabel_timeline(const AttachmentTimeline& timeline, const TrackingAreaMap& ta_map);

// Trace files: `ue_id,profile,tick,x_m,y_m`, one row per tick, rows of a UE
// contiguous and in tick order.
std::vector<MobilityTrace> read_traces_csv(std::istream& in);
void write_traces_csv(std::ostream& out, std::span<const MobilityTrace> traces);

// Throws Error(invalid_argument) if ticks are not consecutive or a step
// exceeds the profile speed cap.
void validate_trace(const MobilityTrace& trace);

}  // namespace pgpp
