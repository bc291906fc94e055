#include <doctest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "pgpp/error.hpp"
#include "pgpp/mobility.hpp"
#include "pgpp/topology.hpp"

using namespace pgpp;

namespace {

const Topology& metro() {
  static const Topology t = [] {
    SyntheticTopologyConfig cfg;
    cfg.n_sites = 500;
    cfg.ta_count = 50;
    cfg.seed = 3;
    return Topology::build(synthesize_sites(cfg));
  }();
  return t;
}

}  // namespace

TEST_CASE("single pedestrian, single tick") {
  TraceSynthConfig cfg;
  cfg.n_pedestrians = 1;
  cfg.duration_ticks = 1;
  const auto traces = synth_traces(Rect{0, 0, 100, 100}, cfg);
  REQUIRE(traces.size() == 1);
  CHECK(traces[0].samples.size() == 1);
  CHECK(traces[0].profile == Profile::pedestrian);
  CHECK(synth_traces(Rect{0, 0, 100, 100}, TraceSynthConfig{}).empty());
}

TEST_CASE("synthetic traces respect speed caps and are deterministic") {
  TraceSynthConfig cfg;
  cfg.n_cars = 20;
  cfg.n_pedestrians = 20;
  cfg.duration_ticks = 720;
  cfg.seed = 4;
  const Rect bounds{0, 0, 60000, 60000};
  const auto traces = synth_traces(bounds, cfg);
  const auto again = synth_traces(bounds, cfg);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    CHECK(t.ue_id == i);
    CHECK(t.profile == (i < 20 ? Profile::car : Profile::pedestrian));
    CHECK_NOTHROW(validate_trace(t));
    double path = 0;
    for (std::size_t k = 1; k < t.samples.size(); ++k) path += distance(t.samples[k - 1].position, t.samples[k].position);
    CHECK(path <= speed_of(t.profile).cap_mps * 3600.0);
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      CHECK(bounds.contains(t.samples[k].position));
      CHECK(t.samples[k].position == again[i].samples[k].position);
    }
  }
}

TEST_CASE("cars visit more eNBs than pedestrians") {
  const Topology& t = metro();
  TraceSynthConfig cfg;
  cfg.n_cars = 500;
  cfg.n_pedestrians = 500;
  cfg.duration_ticks = 720;
  cfg.seed = 8;
  const auto traces = synth_traces(t.region(), cfg);
  std::vector<double> cars;
  std::vector<double> walkers;
  for (const auto& tr : traces) {
    const AttachmentTimeline tl = attach_timeline(tr, t.locator(), t.ta_map());
    std::set<EnbId> seen;
    for (const auto& a : tl.attachments) seen.insert(a.enb_id);
    (tr.profile == Profile::car ? cars : walkers).push_back(static_cast<double>(seen.size()));
  }
  std::sort(cars.begin(), cars.end());
  std::sort(walkers.begin(), walkers.end());
  CHECK(cars[cars.size() / 2] > walkers[walkers.size() / 2]);
}

TEST_CASE("attachment timelines") {
  const Topology& t = metro();
  SUBCASE("stationary UE at a site keeps its eNB") {
    const SitePoint site = t.site_points()[17];
    MobilityTrace tr{1, Profile::pedestrian, {}};
    for (std::int64_t k = 0; k < 30; ++k) tr.samples.push_back({k, site.position});
    const auto tl = attach_timeline(tr, t.locator(), t.ta_map());
    for (const auto& a : tl.attachments) {
      CHECK(a.enb_id == site.enb_id);
      CHECK(a.ta_id == t.ta_map().ta_of(site.enb_id));
    }
  }
  SUBCASE("crossing the midline between two sites switches at the analytic tick") {
    const std::vector<EnbSite> sites = {{1, 34.0, -118.30, 0}, {2, 34.0, -118.20, 1}, {3, 34.3, -118.25, 2}};
    const Topology small = Topology::build(sites);
    const auto pos = small.positions_by_id();
    const Point a = pos.at(1);
    const Point b = pos.at(2);
    MobilityTrace tr{5, Profile::car, {}};
    const double speed = 37.3;  // m per tick along a -> b
    const double len = distance(a, b);
    const std::int64_t ticks = static_cast<std::int64_t>(len / speed);
    for (std::int64_t k = 0; k <= ticks; ++k) {
      const double f = speed * static_cast<double>(k) / len;
      tr.samples.push_back({k, {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f}});
    }
    // First tick past the perpendicular bisector.
    std::int64_t expected = -1;
    for (std::int64_t k = 0; k <= ticks; ++k) {
      const Point p = tr.samples[static_cast<std::size_t>(k)].position;
      if (squared_distance(p, b) < squared_distance(p, a)) {
        expected = k;
        break;
      }
    }
    REQUIRE(expected > 0);
    const double analytic = std::ceil((len / 2) / speed);
    CHECK(static_cast<double>(expected) == analytic);
    const auto tl = attach_timeline(tr, small.locator(), small.ta_map());
    for (const auto& att : tl.attachments) CHECK(att.enb_id == (att.tick < expected ? 1u : 2u));
  }
  SUBCASE("random traces match brute-force nearest site") {
    TraceSynthConfig cfg;
    cfg.n_cars = 50;
    cfg.n_pedestrians = 50;
    cfg.duration_ticks = 60;
    cfg.seed = 10;
    for (const auto& tr : synth_traces(t.region(), cfg)) {
      const auto tl = attach_timeline(tr, t.locator(), t.ta_map());
      REQUIRE(tl.attachments.size() == tr.samples.size());
      for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        CHECK(tl.attachments[k].enb_id == oracle::nearest_site(t.site_points(), tr.samples[k].position));
      }
    }
  }
  SUBCASE("out-of-region sample names the UE and tick") {
    MobilityTrace tr{42, Profile::pedestrian, {{0, {0, 0}}, {1, {t.region().max_x + 10, 0}}}};
    try {
      attach_timeline(tr, t.locator(), t.ta_map());
      FAIL("expected out_of_region");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::out_of_region);
      const std::string msg = e.what();
      CHECK(msg.find("42") != std::string::npos);
      CHECK(msg.find("tick 1") != std::string::npos);
    }
  }
}

TEST_CASE("trace CSV round trip and validation") {
  TraceSynthConfig cfg;
  cfg.n_cars = 2;
  cfg.n_pedestrians = 2;
  cfg.duration_ticks = 10;
  const auto traces = synth_traces(Rect{0, 0, 5000, 5000}, cfg);
  std::stringstream ss;
  write_traces_csv(ss, traces);
  const auto back = read_traces_csv(ss);
  REQUIRE(back.size() == traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    CHECK(back[i].ue_id == traces[i].ue_id);
    CHECK(back[i].profile == traces[i].profile);
    REQUIRE(back[i].samples.size() == traces[i].samples.size());
    CHECK(back[i].samples.back().position.x == doctest::Approx(traces[i].samples.back().position.x));
  }
  MobilityTrace jump{1, Profile::pedestrian, {{0, {0, 0}}, {1, {100, 0}}}};
  CHECK_THROWS_AS(validate_trace(jump), Error);
  MobilityTrace gap{1, Profile::car, {{0, {0, 0}}, {2, {10, 0}}}};
  CHECK_THROWS_AS(validate_trace(gap), Error);
}
