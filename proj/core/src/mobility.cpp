#include "pgpp/mobility.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "pgpp/error.hpp"
#include "pgpp/rng.hpp"

namespace pgpp {

std::string_view to_string(Profile profile) { return profile == Profile::car ? "car" : "pedestrian"; }

Profile parse_profile(std::string_view text) {
  if (text == "car") return Profile::car;
  if (text == "pedestrian") return Profile::pedestrian;
  throw Error(ErrorCode::parse, "unknown mobility profile '" + std::string(text) + "'");
}

ProfileSpeed speed_of(Profile profile) {
  switch (profile) {
    case Profile::car: return ProfileSpeed{13.0, 0.2, 40.0};
    case Profile::pedestrian: return ProfileSpeed{1.4, 0.2, 2.5};
  }
  return ProfileSpeed{1.4, 0.2, 2.5};
}

namespace {

MobilityTrace synth_one(UeId id, Profile profile, const Rect& bounds, std::int64_t duration, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "trace", id));
  const ProfileSpeed speed = speed_of(profile);
  Point pos{uniform_real(rng, bounds.min_x, bounds.max_x), uniform_real(rng, bounds.min_y, bounds.max_y)};
  const Point dest{uniform_real(rng, bounds.min_x, bounds.max_x), uniform_real(rng, bounds.min_y, bounds.max_y)};

  MobilityTrace trace{id, profile, {}};
  trace.samples.reserve(static_cast<std::size_t>(duration));
  trace.samples.push_back(TraceSample{0, pos});
  for (std::int64_t tick = 1; tick < duration; ++tick) {
    const double step =
        speed.mean_mps * uniform_real(rng, 1.0 - speed.jitter, 1.0 + speed.jitter) * kTickSeconds;
    const double remaining = distance(pos, dest);
    if (remaining <= step) {
      pos = dest;
    } else {
      const double f = step / remaining;
      pos = Point{pos.x + (dest.x - pos.x) * f, pos.y + (dest.y - pos.y) * f};
    }
    trace.samples.push_back(TraceSample{tick, pos});
  }
  return trace;
}

}  // namespace

std::vector<MobilityTrace> synth_traces(const Rect& bounds, const TraceSynthConfig& config) {
  if (config.duration_ticks < 1) throw Error(ErrorCode::invalid_argument, "duration_ticks must be >= 1");
  std::vector<MobilityTrace> traces;
  traces.reserve(config.n_cars + config.n_pedestrians);
  for (std::size_t i = 0; i < config.n_cars; ++i) {
    traces.push_back(synth_one(i, Profile::car, bounds, config.duration_ticks, config.seed));
  }
  for (std::size_t i = 0; i < config.n_pedestrians; ++i) {
    traces.push_back(synth_one(config.n_cars + i, Profile::pedestrian, bounds, config.duration_ticks, config.seed));
  }
  return traces;
}

AttachmentTimeline attach_timeline(const MobilityTrace& trace, const CellLocator& locator,
                                   const TrackingAreaMap& ta_map) {
  AttachmentTimeline timeline{trace.ue_id, {}};
  timeline.attachments.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) {
    if (!locator.region().contains(s.position)) {
      throw Error(ErrorCode::out_of_region, "UE " + std::to_string(trace.ue_id) + " at tick " +
                                                std::to_string(s.tick) + " is outside the coverage region");
    }
    const EnbId enb = locator.locate(s.position);
    timeline.attachments.push_back(Attachment{s.tick, enb, ta_map.ta_of(enb)});
  }
  return timeline;
}

AttachmentTimeline relabel_timeline(const AttachmentTimeline& timeline, const TrackingAreaMap& ta_map) {
  AttachmentTimeline out = timeline;
  for (Attachment& a : out.attachments) a.ta_id = ta_map.ta_of(a.enb_id);
  return out;
}

void validate_trace(const MobilityTrace& trace) {
  const double cap = speed_of(trace.profile).cap_mps * kTickSeconds;
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    const TraceSample& a = trace.samples[i - 1];
    const TraceSample& b = trace.samples[i];
    if (b.tick != a.tick + 1) {
      throw Error(ErrorCode::invalid_argument,
                  "UE " + std::to_string(trace.ue_id) + ": tick " + std::to_string(b.tick) + " does not follow " +
                      std::to_string(a.tick));
    }
    if (distance(a.position, b.position) > cap * (1.0 + 1e-9)) {
      throw Error(ErrorCode::invalid_argument, "UE " + std::to_string(trace.ue_id) + ": speed cap exceeded at tick " +
                                                   std::to_string(b.tick));
    }
  }
}

std::vector<MobilityTrace> read_traces_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "trace CSV: missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ue_id,profile,tick,x_m,y_m") {
    throw Error(ErrorCode::parse, "trace CSV: expected header ue_id,profile,tick,x_m,y_m");
  }
  std::vector<MobilityTrace> traces;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id_s, profile_s, tick_s, x_s, y_s;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::parse, "trace CSV line " + std::to_string(line_no) + ": " + why);
    };
    if (!std::getline(row, id_s, ',') || !std::getline(row, profile_s, ',') || !std::getline(row, tick_s, ',') ||
        !std::getline(row, x_s, ',') || !std::getline(row, y_s)) {
      fail("expected 5 fields");
    }
    UeId id = 0;
    std::int64_t tick = 0;
    if (std::from_chars(id_s.data(), id_s.data() + id_s.size(), id).ec != std::errc{}) fail("bad ue_id");
    if (std::from_chars(tick_s.data(), tick_s.data() + tick_s.size(), tick).ec != std::errc{}) fail("bad tick");
    char* end = nullptr;
    const double x = std::strtod(x_s.c_str(), &end);
    if (end != x_s.c_str() + x_s.size()) fail("bad x_m");
    const double y = std::strtod(y_s.c_str(), &end);
    if (end != y_s.c_str() + y_s.size()) fail("bad y_m");
    Profile profile = Profile::pedestrian;
    try {
      profile = parse_profile(profile_s);
    } catch (const Error&) {
      fail("bad profile '" + profile_s + "'");
    }
    if (traces.empty() || traces.back().ue_id != id) {
      traces.push_back(MobilityTrace{id, profile, {}});
    } else if (traces.back().profile != profile) {
      fail("profile changes within UE " + std::to_string(id));
    }
    traces.back().samples.push_back(TraceSample{tick, Point{x, y}});
  }
  for (const MobilityTrace& t : traces) validate_trace(t);
  return traces;
}

void write_traces_csv(std::ostream& out, std::span<const MobilityTrace> traces) {
  out << "ue_id,profile,tick,x_m,y_m\n";
  out.precision(12);
  for (const MobilityTrace& t : traces) {
    for (const TraceSample& s : t.samples) {
      out << t.ue_id << ',' << to_string(t.profile) << ',' << s.tick << ',' << s.position.x << ',' << s.position.y
          << '\n';
    }
  }
}

}  // namespace pgpp
