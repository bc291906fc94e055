#include <doctest.h>

#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "pgpp/error.hpp"
#include "pgpp/kmeans.hpp"
#include "pgpp/rng.hpp"
#include "pgpp/serialize.hpp"
#include "pgpp/topology.hpp"
#include "pgpp/voronoi.hpp"

using namespace pgpp;

namespace {

std::vector<SitePoint> random_sites(std::size_t n, const Rect& region, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SitePoint> sites;
  for (std::size_t i = 0; i < n; ++i) {
    sites.push_back({static_cast<EnbId>(i + 1),
                     {uniform_real(rng, region.min_x, region.max_x), uniform_real(rng, region.min_y, region.max_y)}});
  }
  return sites;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::parse;
}

}  // namespace

TEST_CASE("square of four sites gives four congruent cells with two edge neighbors each") {
  const std::vector<SitePoint> sites = {{1, {0, 0}}, {2, {1000, 0}}, {3, {1000, 1000}}, {4, {0, 1000}}};
  const Rect region{-1000, -1000, 2000, 2000};
  const auto cells = voronoi_cells(sites, region);
  REQUIRE(cells.size() == 4);
  for (const auto& c : cells) {
    CHECK(polygon_area(c.polygon) == doctest::Approx(9e6 / 4).epsilon(1e-9));
    CHECK(c.neighbors.size() == 2);
  }
  CHECK(cells[0].neighbors == std::vector<EnbId>{2, 4});
  CHECK(cells[2].neighbors == std::vector<EnbId>{2, 4});
}

TEST_CASE("degenerate inputs are rejected") {
  const Rect region{-10, -10, 10, 10};
  CHECK(code_of([&] { voronoi_cells(std::vector<SitePoint>{{1, {0, 0}}, {2, {1, 1}}}, region); }) ==
        ErrorCode::topology_too_small);
  CHECK(code_of([&] { voronoi_cells(std::vector<SitePoint>{{1, {0, 0}}, {2, {1, 1}}, {3, {2, 2}}}, region); }) ==
        ErrorCode::degenerate_geometry);
  CHECK(code_of([&] { voronoi_cells(std::vector<SitePoint>{{1, {0, 0}}, {2, {0, 0}}, {3, {2, 1}}}, region); }) ==
        ErrorCode::degenerate_geometry);
  CHECK(code_of([&] { voronoi_cells(std::vector<SitePoint>{{1, {0, 0}}, {2, {1, 0}}, {3, {20, 1}}}, region); }) ==
        ErrorCode::out_of_region);
}

TEST_CASE("random sites: sampled points fall in the cell of their nearest site") {
  const Rect region{0, 0, 10000, 8000};
  const auto sites = random_sites(50, region, 11);
  const auto cells = voronoi_cells(sites, region);
  const CellLocator locator(cells, region);

  double area = 0;
  for (const auto& c : cells) area += polygon_area(c.polygon);
  CHECK(area == doctest::Approx(region.width() * region.height()).epsilon(1e-9));

  Rng rng(12);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point p{uniform_real(rng, region.min_x, region.max_x), uniform_real(rng, region.min_y, region.max_y)};
    const EnbId expected = oracle::nearest_site(sites, p);
    const auto& cell = *std::find_if(cells.begin(), cells.end(), [&](const auto& c) { return c.enb_id == expected; });
    if (!convex_polygon_contains(cell.polygon, p, 1e-6)) ++mismatches;
    if (locator.locate(p) != expected) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("cell neighbors match the bisector oracle and are symmetric") {
  const Rect region{0, 0, 10000, 10000};
  const auto sites = random_sites(50, region, 21);
  const auto cells = voronoi_cells(sites, region);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& ni = cells[i].neighbors;
    CHECK(std::find(ni.begin(), ni.end(), cells[i].enb_id) == ni.end());
    for (std::size_t j = 0; j < sites.size(); ++j) {
      if (i == j) continue;
      const bool listed = std::binary_search(ni.begin(), ni.end(), sites[j].enb_id);
      const bool expected = oracle::voronoi_neighbors(sites, i, j, region, 1e-3);
      CHECK_MESSAGE(listed == expected, "sites " << sites[i].enb_id << " and " << sites[j].enb_id);
      const auto& nj = cells[j].neighbors;
      CHECK(listed == std::binary_search(nj.begin(), nj.end(), sites[i].enb_id));
    }
  }
}

TEST_CASE("assign_enb: own coordinates, boundary tie-break and brute force") {
  const Rect region{0, 0, 5000, 5000};
  const auto sites = random_sites(40, region, 31);
  const auto cells = voronoi_cells(sites, region);
  const CellLocator locator(cells, region);
  for (const auto& s : sites) CHECK(assign_enb(s.position, locator) == s.enb_id);

  const std::vector<SitePoint> pair = {{7, {1000, 1000}}, {3, {3000, 1000}}, {9, {2000, 4000}}};
  const auto pair_cells = voronoi_cells(pair, region);
  const CellLocator pair_locator(pair_cells, region);
  CHECK(assign_enb({2000, 1000}, pair_locator) == 3);

  Rng rng(32);
  for (int i = 0; i < 1000; ++i) {
    const Point p{uniform_real(rng, 0, 5000), uniform_real(rng, 0, 5000)};
    CHECK(assign_enb(p, locator) == oracle::nearest_site(sites, p));
  }
  CHECK_THROWS_AS(assign_enb({-1, 0}, locator), Error);
}

TEST_CASE("site CSV loading") {
  SUBCASE("three sites in one TA") {
    std::istringstream in("enb_id,lat,lon,ta_id\n1,34.00,-118.20,7\n2,34.01,-118.25,7\n3,34.05,-118.22,7\n");
    const LoadedTopology t = load_topology(in);
    CHECK(t.ta_map.ta_count() == 1);
    CHECK(t.ta_map.neighbors(7).empty());
  }
  SUBCASE("malformed row names its line") {
    std::istringstream in("enb_id,lat,lon,ta_id\n1,34.0,-118.2,1\n2,north,-118.3,1\n");
    try {
      read_sites_csv(in);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("duplicates keep the lowest id and too few sites fail") {
    std::istringstream in("enb_id,lat,lon,ta_id\n5,34.0,-118.2,1\n2,34.0,-118.2,1\n9,34.1,-118.3,1\n");
    CHECK(code_of([&] { load_topology(in); }) == ErrorCode::topology_too_small);
    std::istringstream in2("enb_id,lat,lon,ta_id\n5,34.0,-118.2,1\n2,34.0,-118.2,1\n9,34.1,-118.3,1\n4,34.0,-118.4,2\n");
    const Topology t = Topology::build(read_sites_csv(in2));
    std::vector<EnbId> ids;
    for (const auto& s : t.sites()) ids.push_back(s.enb_id);
    CHECK(ids == std::vector<EnbId>{2, 4, 9});
  }
  SUBCASE("OpenCellID column mapping") {
    std::istringstream in("radio,cell,lon,lat,area\nLTE,1,-118.2,34.0,10\nLTE,2,-118.3,34.1,10\nLTE,3,-118.25,34.2,11\n");
    const auto sites = read_sites_csv(in, SiteCsvColumns{"cell", "lat", "lon", "area"});
    REQUIRE(sites.size() == 3);
    CHECK(sites[2].ta_id == 11);
    CHECK(sites[1].lat == doctest::Approx(34.1));
  }
}

TEST_CASE("two spatially separated clusters are adjacent iff a cell edge crosses them") {
  Rng rng(41);
  std::vector<EnbSite> sites;
  for (int i = 0; i < 10; ++i) {
    const bool west = i < 5;
    sites.push_back({static_cast<EnbId>(i + 1), 34.0 + uniform_real(rng, 0, 0.02),
                     (west ? -118.4 : -118.2) + uniform_real(rng, 0, 0.02), west ? 0 : 1});
  }
  const Topology t = Topology::build(sites);
  bool crossing = false;
  const auto& pts = t.site_points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const bool across = (pts[i].enb_id <= 5) != (pts[j].enb_id <= 5);
      if (across && oracle::voronoi_neighbors(pts, i, j, t.region(), 1e-3)) crossing = true;
    }
  }
  CHECK(crossing);
  CHECK(t.ta_map().adjacent(0, 1) == crossing);
  CHECK(t.ta_map().adjacent(1, 0) == crossing);
}

TEST_CASE("TA map partition and adjacency consistency on a synthetic topology") {
  SyntheticTopologyConfig cfg;
  cfg.n_sites = 300;
  cfg.ta_count = 30;
  cfg.seed = 5;
  const Topology t = Topology::build(synthesize_sites(cfg));
  const auto& map = t.ta_map();
  std::size_t total = 0;
  std::set<EnbId> seen;
  for (const auto& [ta, members] : map.tas()) {
    CHECK_FALSE(members.empty());
    total += members.size();
    for (EnbId e : members) CHECK(seen.insert(e).second);
  }
  CHECK(total == t.sites().size());

  std::set<std::pair<TaId, TaId>> expected;
  const auto& pts = t.site_points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const TaId a = map.ta_of(pts[i].enb_id);
      const TaId b = map.ta_of(pts[j].enb_id);
      if (a != b && oracle::voronoi_neighbors(pts, i, j, t.region(), 1e-3)) {
        expected.insert({a, b});
        expected.insert({b, a});
      }
    }
  }
  std::set<std::pair<TaId, TaId>> actual;
  for (const auto& [ta, ns] : map.adjacency()) {
    for (TaId n : ns) {
      CHECK(n != ta);
      actual.insert({ta, n});
    }
  }
  CHECK(actual == expected);
}

TEST_CASE("k-means tracking areas") {
  SyntheticTopologyConfig cfg;
  cfg.n_sites = 1200;
  cfg.seed = 9;
  const Topology t = Topology::build(synthesize_sites(cfg));
  const std::size_t n = t.sites().size();

  CHECK(kmeans_tas(t, 1, 3).ta_count() == 1);
  const auto per_site = kmeans_tas(t, n, 3);
  CHECK(per_site.ta_count() == n);
  for (const auto& [ta, members] : per_site.tas()) CHECK(members.size() == 1);

  for (std::size_t k : {25, 50, 100, 500, 1000}) {
    const auto map = kmeans_tas(t, k, 3);
    CHECK(map.ta_count() == k);
    std::size_t total = 0;
    for (const auto& [ta, members] : map.tas()) total += members.size();
    CHECK(total == n);
  }
  CHECK(kmeans_tas(t, 50, 4).fingerprint() == kmeans_tas(t, 50, 4).fingerprint());
  CHECK(code_of([&] { kmeans_tas(t, n + 1, 3); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { kmeans_tas(t, 0, 3); }) == ErrorCode::invalid_argument);
}

TEST_CASE("k-means assigns every point to its nearest center") {
  Rng rng(77);
  std::vector<Point> pts;
  for (int i = 0; i < 400; ++i) pts.push_back({uniform_real(rng, 0, 1000), uniform_real(rng, 0, 1000)});
  const KMeansResult r = kmeans(pts, 12, 5);
  CHECK(r.converged);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& c : r.centers) best = std::min(best, squared_distance(pts[i], c));
    CHECK(squared_distance(pts[i], r.centers[r.assignment[i]]) == doctest::Approx(best));
  }
}

TEST_CASE("projection round trip and synthetic determinism") {
  const AzimuthalEquidistant proj({34.05, -118.25});
  const LatLon ll{34.2, -118.0};
  const LatLon back = proj.inverse(proj.forward(ll));
  CHECK(back.lat == doctest::Approx(ll.lat).epsilon(1e-12));
  CHECK(back.lon == doctest::Approx(ll.lon).epsilon(1e-12));
  CHECK(distance(proj.forward({34.05, -118.25}), {0, 0}) < 1e-9);

  SyntheticTopologyConfig cfg;
  cfg.n_sites = 200;
  cfg.ta_count = 10;
  const auto a = synthesize_sites(cfg);
  const auto b = synthesize_sites(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lat == b[i].lat);
    CHECK(a[i].ta_id == b[i].ta_id);
  }
}

TEST_CASE("topology snapshot round trip preserves the TA map") {
  SyntheticTopologyConfig cfg;
  cfg.n_sites = 120;
  cfg.ta_count = 12;
  const Topology t = Topology::build(synthesize_sites(cfg));
  const LoadedTopology loaded = topology_from_json(topology_to_json(t));
  CHECK(loaded.ta_map.fingerprint() == t.ta_map().fingerprint());
  CHECK(loaded.sites.size() == t.sites().size());
}
