#include "pgpp/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "pgpp/error.hpp"
#include "pgpp/kmeans.hpp"
#include "pgpp/rng.hpp"

namespace pgpp {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  if (text.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size() && std::isfinite(out);
  } else {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
  }
}

std::uint64_t fnv1a(std::uint64_t h, std::int64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= static_cast<std::uint64_t>(v >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

TrackingAreaMap TrackingAreaMap::build(const std::map<EnbId, TaId>& assignment,
                                       std::span<const CoverageCell> cells) {
  TrackingAreaMap map;
  for (const auto& [enb, ta] : assignment) {
    map.tas_[ta].push_back(enb);
    map.enb_to_ta_.emplace(enb, ta);
  }
  for (auto& [ta, members] : map.tas_) {
    std::sort(members.begin(), members.end());
    map.adjacency_[ta];
  }
  std::map<TaId, std::set<TaId>> adjacent;
  for (const CoverageCell& cell : cells) {
    const auto own = map.enb_to_ta_.find(cell.enb_id);
    if (own == map.enb_to_ta_.end()) {
      throw Error(ErrorCode::unknown_tracking_area, "eNB " + std::to_string(cell.enb_id) + " has no TA");
    }
    for (EnbId n : cell.neighbors) {
      const auto other = map.enb_to_ta_.find(n);
      if (other == map.enb_to_ta_.end()) {
        throw Error(ErrorCode::unknown_tracking_area, "eNB " + std::to_string(n) + " has no TA");
      }
      if (other->second != own->second) {
        adjacent[own->second].insert(other->second);
        adjacent[other->second].insert(own->second);
      }
    }
  }
  for (const auto& [ta, set] : adjacent) map.adjacency_[ta].assign(set.begin(), set.end());
  return map;
}

bool TrackingAreaMap::adjacent(TaId a, TaId b) const {
  const auto it = adjacency_.find(a);
  if (it == adjacency_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), b);
}

TaId TrackingAreaMap::ta_of(EnbId enb) const {
  const auto it = enb_to_ta_.find(enb);
  if (it == enb_to_ta_.end()) {
    throw Error(ErrorCode::unknown_tracking_area, "eNB " + std::to_string(enb) + " not in any TA");
  }
  return it->second;
}

const std::vector<EnbId>& TrackingAreaMap::members(TaId ta) const {
  const auto it = tas_.find(ta);
  if (it == tas_.end()) throw Error(ErrorCode::unknown_tracking_area, "unknown TA " + std::to_string(ta));
  return it->second;
}

const std::vector<TaId>& TrackingAreaMap::neighbors(TaId ta) const {
  const auto it = adjacency_.find(ta);
  if (it == adjacency_.end()) throw Error(ErrorCode::unknown_tracking_area, "unknown TA " + std::to_string(ta));
  return it->second;
}

std::string TrackingAreaMap::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [ta, members] : tas_) {
    h = fnv1a(h, ta);
    for (EnbId e : members) h = fnv1a(h, static_cast<std::int64_t>(e));
    h = fnv1a(h, -1);
    for (TaId n : adjacency_.at(ta)) h = fnv1a(h, n);
    h = fnv1a(h, -2);
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

std::vector<EnbSite> read_sites_csv(std::istream& in, const SiteCsvColumns& columns) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "site CSV: missing header");
  ++line_no;
  const std::vector<std::string> header = split_csv(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::parse, "site CSV: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = column(columns.enb_id);
  const std::size_t c_lat = column(columns.lat);
  const std::size_t c_lon = column(columns.lon);
  const std::size_t c_ta = column(columns.ta_id);

  std::vector<EnbSite> sites;
  std::set<EnbId> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::parse, "site CSV line " + std::to_string(line_no) + ": " + why);
    };
    if (f.size() < header.size()) fail("expected " + std::to_string(header.size()) + " fields");
    EnbSite s;
    if (!parse_number(f[c_id], s.enb_id)) fail("bad enb_id '" + f[c_id] + "'");
    if (!parse_number(f[c_lat], s.lat) || s.lat < -90.0 || s.lat > 90.0) fail("bad lat '" + f[c_lat] + "'");
    if (!parse_number(f[c_lon], s.lon) || s.lon < -180.0 || s.lon > 180.0) fail("bad lon '" + f[c_lon] + "'");
    if (!parse_number(f[c_ta], s.ta_id)) fail("bad ta_id '" + f[c_ta] + "'");
    if (!seen.insert(s.enb_id).second) fail("duplicate enb_id " + std::to_string(s.enb_id));
    sites.push_back(s);
  }
  return sites;
}

void write_sites_csv(std::ostream& out, std::span<const EnbSite> sites) {
  out << "enb_id,lat,lon,ta_id\n";
  out.precision(10);
  for (const EnbSite& s : sites) out << s.enb_id << ',' << s.lat << ',' << s.lon << ',' << s.ta_id << '\n';
}

Topology::Topology(std::vector<EnbSite> sites, std::vector<SitePoint> points, AzimuthalEquidistant projection,
                   Rect region, std::vector<CoverageCell> cells, TrackingAreaMap ta_map)
    : sites_(std::move(sites)),
      points_(std::move(points)),
      projection_(projection),
      region_(region),
      cells_(std::move(cells)),
      ta_map_(std::move(ta_map)),
      locator_(cells_, region_) {}

Topology Topology::build(std::vector<EnbSite> sites, std::optional<Rect> region) {
  // Deduplicate on exact coordinates, keeping the lowest enb_id.
  std::sort(sites.begin(), sites.end(), [](const EnbSite& a, const EnbSite& b) { return a.enb_id < b.enb_id; });
  std::set<std::pair<double, double>> coords;
  std::vector<EnbSite> unique;
  unique.reserve(sites.size());
  for (const EnbSite& s : sites) {
    if (coords.emplace(s.lat, s.lon).second) unique.push_back(s);
  }
  if (unique.size() < 3) {
    throw Error(ErrorCode::topology_too_small,
                "topology needs at least 3 distinct sites, got " + std::to_string(unique.size()));
  }

  double lat = 0.0;
  double lon = 0.0;
  for (const EnbSite& s : unique) {
    lat += s.lat;
    lon += s.lon;
  }
  const AzimuthalEquidistant projection(
      LatLon{lat / static_cast<double>(unique.size()), lon / static_cast<double>(unique.size())});

  std::vector<SitePoint> points;
  std::vector<Point> raw;
  points.reserve(unique.size());
  for (const EnbSite& s : unique) {
    const Point p = projection.forward(LatLon{s.lat, s.lon});
    points.push_back(SitePoint{s.enb_id, p});
    raw.push_back(p);
  }
  const Rect bounds = region.value_or(Rect::bounding(raw).inflated(0.10));
  std::vector<CoverageCell> cells = voronoi_cells(points, bounds);

  std::map<EnbId, TaId> assignment;
  for (const EnbSite& s : unique) assignment.emplace(s.enb_id, s.ta_id);
  TrackingAreaMap map = TrackingAreaMap::build(assignment, cells);
  return Topology(std::move(unique), std::move(points), projection, bounds, std::move(cells), std::move(map));
}

std::unordered_map<EnbId, Point> Topology::positions_by_id() const {
  std::unordered_map<EnbId, Point> out;
  out.reserve(points_.size());
  for (const SitePoint& p : points_) out.emplace(p.enb_id, p.position);
  return out;
}

Topology Topology::with_ta_map(TrackingAreaMap map) const {
  std::vector<EnbSite> sites = sites_;
  for (EnbSite& s : sites) s.ta_id = map.ta_of(s.enb_id);
  return Topology(std::move(sites), points_, projection_, region_, cells_, std::move(map));
}

LoadedTopology load_topology(std::istream& in, const SiteCsvColumns& columns) {
  Topology topology = Topology::build(read_sites_csv(in, columns));
  return LoadedTopology{topology.sites(), topology.ta_map()};
}

std::vector<EnbSite> synthesize_sites(const SyntheticTopologyConfig& config) {
  if (config.n_sites < 3) throw Error(ErrorCode::invalid_argument, "synthetic topology needs >= 3 sites");
  if (config.ta_count == 0 || config.ta_count > config.n_sites) {
    throw Error(ErrorCode::invalid_argument, "synthetic ta_count must be in 1..n_sites");
  }
  Rng rng(derive_seed(config.seed, "synthetic-topology"));
  const double half = config.extent_km * 500.0;
  const Rect square{-half, -half, half, half};

  std::vector<Point> centers;
  for (std::size_t c = 0; c < std::max<std::size_t>(config.n_clusters, 1); ++c) {
    centers.push_back(Point{uniform_real(rng, -0.7 * half, 0.7 * half), uniform_real(rng, -0.7 * half, 0.7 * half)});
  }
  const double sigma = config.extent_km * 1000.0 / 12.0;

  const AzimuthalEquidistant projection(config.center);
  std::vector<EnbSite> sites;
  std::vector<Point> points;
  std::set<std::pair<double, double>> seen;
  while (sites.size() < config.n_sites) {
    Point p;
    if (config.n_clusters > 0 && uniform01(rng) < config.clustered_fraction) {
      const Point& c = centers[uniform_index(rng, centers.size())];
      p = Point{c.x + sigma * standard_normal(rng), c.y + sigma * standard_normal(rng)};
      if (!square.contains(p)) continue;
    } else {
      p = Point{uniform_real(rng, -half, half), uniform_real(rng, -half, half)};
    }
    const LatLon ll = projection.inverse(p);
    if (!seen.emplace(ll.lat, ll.lon).second) continue;
    sites.push_back(EnbSite{static_cast<EnbId>(sites.size() + 1), ll.lat, ll.lon, 0});
    points.push_back(p);
  }

  const KMeansResult clusters = kmeans(points, config.ta_count, derive_seed(config.seed, "synthetic-tas"));
  for (std::size_t i = 0; i < sites.size(); ++i) sites[i].ta_id = static_cast<TaId>(clusters.assignment[i]);
  return sites;
}

}  // namespace pgpp
