#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pgpp/geo.hpp"
#include "pgpp/voronoi.hpp"

namespace pgpp {

using TaId = std::int64_t;

struct EnbSite {
  EnbId enb_id = 0;
  double lat = 0.0;
  double lon = 0.0;
  TaId ta_id = 0;
};

// TA membership and the TA adjacency graph. Members and neighbor lists are
// kept sorted so that iteration order is reproducible.
class TrackingAreaMap {
 public:
  TrackingAreaMap() = default;

  // Builds membership from an eNB -> TA assignment and derives adjacency from
  // the cells' Voronoi neighbor sets: two TAs are adjacent iff some eNB of one
  // shares a cell edge with an eNB of the other.
  static TrackingAreaMap build(const std::map<EnbId, TaId>& assignment,
                               std::span<const CoverageCell> cells);

  const std::map<TaId, std::vector<EnbId>>& tas() const { return tas_; }
  const std::map<TaId, std::vector<TaId>>& adjacency() const { return adjacency_; }

  std::size_t ta_count() const { return tas_.size(); }
  std::size_t enb_count() const { return enb_to_ta_.size(); }
  bool contains(TaId ta) const { return tas_.contains(ta); }
  bool adjacent(TaId a, TaId b) const;

  // Throws Error(unknown_tracking_area) for unknown ids.
  TaId ta_of(EnbId enb) const;
  const std::vector<EnbId>& members(TaId ta) const;
  const std::vector<TaId>& neighbors(TaId ta) const;

  // Stable short fingerprint of membership and adjacency.
  std::string fingerprint() const;

 private:
  std::map<TaId, std::vector<EnbId>> tas_;
  std::map<TaId, std::vector<TaId>> adjacency_;
  std::unordered_map<EnbId, TaId> enb_to_ta_;
};

// Column mapping for site CSV files. The default matches the native
// `enb_id,lat,lon,ta_id` header; OpenCellID exports map as
// {cell, lat, lon, area}.
struct SiteCsvColumns {
  std::string enb_id = "enb_id";
  std::string lat = "lat";
  std::string lon = "lon";
  std::string ta_id = "ta_id";
};

// Parses site records. Throws Error(parse) naming the offending line.
std::vector<EnbSite> read_sites_csv(std::istream& in, const SiteCsvColumns& columns = {});
void write_sites_csv(std::ostream& out, std::span<const EnbSite> sites);

// Geometry and tracking areas for one set of eNBs, in a local projection
// centered on the site centroid.
class Topology {
 public:
  // Deduplicates sites on (lat, lon) keeping the lowest enb_id, projects them,
  // computes coverage cells over `region` (default: site bounding box inflated
  // by 10%) and builds the TA map from the sites' ta_id labels.
  static Topology build(std::vector<EnbSite> sites, std::optional<Rect> region = std::nullopt);

  const std::vector<EnbSite>& sites() const { return sites_; }
  const std::vector<SitePoint>& site_points() const { return points_; }
  const std::vector<CoverageCell>& cells() const { return cells_; }
  const TrackingAreaMap& ta_map() const { return ta_map_; }
  const AzimuthalEquidistant& projection() const { return projection_; }
  const Rect& region() const { return region_; }
  const CellLocator& locator() const { return locator_; }

  std::unordered_map<EnbId, Point> positions_by_id() const;

  // Same geometry with a different TA assignment (e.g. from kmeans_tas).
  Topology with_ta_map(TrackingAreaMap map) const;

 private:
  Topology(std::vector<EnbSite> sites, std::vector<SitePoint> points, AzimuthalEquidistant projection,
           Rect region, std::vector<CoverageCell> cells, TrackingAreaMap ta_map);

  std::vector<EnbSite> sites_;
  std::vector<SitePoint> points_;
  AzimuthalEquidistant projection_;
  Rect region_;
  std::vector<CoverageCell> cells_;
  TrackingAreaMap ta_map_;
  CellLocator locator_;
};

struct LoadedTopology {
  std::vector<EnbSite> sites;
  TrackingAreaMap ta_map;
};

// Reads a site CSV and builds its TA map (deduplicated sites, adjacency).
LoadedTopology load_topology(std::istream& in, const SiteCsvColumns& columns = {});

struct SyntheticTopologyConfig {
  std::size_t n_sites = 500;
  std::size_t n_clusters = 8;
  std::size_t ta_count = 50;
  double extent_km = 60.0;
  LatLon center{34.05, -118.25};
  // Share of sites drawn around cluster centers; the rest are spread
  // uniformly to mimic rural coverage.
  double clustered_fraction = 0.7;
  std::uint64_t seed = 1;
};

// Metro-like synthetic deployment with TA labels from k-means.
std::vector<EnbSite> synthesize_sites(const SyntheticTopologyConfig& config);

}  // namespace pgpp
