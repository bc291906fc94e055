#include "pgpp/serialize.hpp"

#include <algorithm>

#include "pgpp/error.hpp"

namespace pgpp {

using nlohmann::json;

namespace {

template <class T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(ErrorCode::parse, std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("field '") + key + "': " + e.what());
  }
}

std::string_view growth_name(TalGrowth growth) {
  return growth == TalGrowth::region_growing ? "region_growing" : "anchor_adjacent";
}

TalGrowth parse_growth(std::string_view text) {
  if (text == "region_growing") return TalGrowth::region_growing;
  if (text == "anchor_adjacent") return TalGrowth::anchor_adjacent;
  throw Error(ErrorCode::parse, "unknown TAL growth '" + std::string(text) + "'");
}

json supportable(const SupportableUsers& users) { return users ? json(*users) : json(nullptr); }

}  // namespace

json topology_to_json(const Topology& topology) {
  const auto positions = topology.positions_by_id();
  std::unordered_map<EnbId, const CoverageCell*> cells;
  for (const CoverageCell& c : topology.cells()) cells.emplace(c.enb_id, &c);
  json sites = json::array();
  for (const EnbSite& s : topology.sites()) {
    const Point p = positions.at(s.enb_id);
    const auto cell = cells.find(s.enb_id);
    sites.push_back({{"enb_id", s.enb_id},
                     {"lat", s.lat},
                     {"lon", s.lon},
                     {"ta_id", topology.ta_map().ta_of(s.enb_id)},
                     {"x_m", p.x},
                     {"y_m", p.y},
                     {"neighbors", cell == cells.end() ? std::vector<EnbId>{} : cell->second->neighbors}});
  }
  json adjacency = json::array();
  for (const auto& [ta, neighbors] : topology.ta_map().adjacency()) {
    adjacency.push_back({{"ta_id", ta}, {"neighbors", neighbors}});
  }
  return {{"ta_map_id", topology.ta_map().fingerprint()},
          {"enb_count", topology.ta_map().enb_count()},
          {"ta_count", topology.ta_map().ta_count()},
          {"sites", std::move(sites)},
          {"adjacency", std::move(adjacency)}};
}

LoadedTopology topology_from_json(const json& doc) {
  LoadedTopology out;
  std::map<EnbId, TaId> assignment;
  std::vector<CoverageCell> cells;
  for (const json& row : field<json>(doc, "sites")) {
    EnbSite s;
    s.enb_id = field<EnbId>(row, "enb_id");
    s.lat = field<double>(row, "lat");
    s.lon = field<double>(row, "lon");
    s.ta_id = field<TaId>(row, "ta_id");
    out.sites.push_back(s);
    assignment[s.enb_id] = s.ta_id;
    CoverageCell cell;
    cell.enb_id = s.enb_id;
    cell.neighbors = field<std::vector<EnbId>>(row, "neighbors");
    cells.push_back(std::move(cell));
  }
  out.ta_map = TrackingAreaMap::build(assignment, cells);
  return out;
}

json sim_config_to_json(const SimConfig& config) {
  return {{"mode", to_string(config.mode)},
          {"tal_length", config.tal_length},
          {"tal_growth", growth_name(config.tal_growth)},
          {"call_fraction", config.traffic.call_fraction},
          {"call_duration_ticks", config.traffic.call_duration_ticks},
          {"tick_seconds", config.tick_seconds},
          {"seed", config.seed}};
}

SimConfig sim_config_from_json(const json& doc) {
  SimConfig c;
  c.mode = parse_paging_mode(field<std::string>(doc, "mode"));
  c.tal_length = field<int>(doc, "tal_length");
  c.tal_growth = parse_growth(field<std::string>(doc, "tal_growth"));
  c.traffic.call_fraction = field<double>(doc, "call_fraction");
  c.traffic.call_duration_ticks = field<std::int64_t>(doc, "call_duration_ticks");
  c.tick_seconds = field<double>(doc, "tick_seconds");
  c.seed = field<std::uint64_t>(doc, "seed");
  return c;
}

json report_to_json(const SimReport& report) {
  json per_enb = json::array();
  for (const auto& [enb, pages] : report.per_enb_pages) per_enb.push_back({enb, pages});
  json records = json::array();
  for (const PageRecord& r : report.page_records) {
    records.push_back({r.tick, r.target_ue, r.broadcast_tas, r.enbs_paged.size(), r.enbs_with_users});
  }
  return {{"config", sim_config_to_json(report.config)},
          {"ta_map_id", report.ta_map_id},
          {"first_tick", report.first_tick},
          {"duration_ticks", report.duration_ticks},
          {"population", report.population},
          {"total_pages", report.total_pages()},
          {"occupied_enb_ticks", report.occupied_enb_ticks},
          {"attached_ue_ticks", report.attached_ue_ticks},
          {"tal_updates", report.tal_updates},
          {"per_enb_pages", std::move(per_enb)},
          {"page_records", std::move(records)}};
}

SimReport report_from_json(const json& doc, const TrackingAreaMap& ta_map) {
  SimReport r;
  r.config = sim_config_from_json(field<json>(doc, "config"));
  r.ta_map_id = field<std::string>(doc, "ta_map_id");
  if (r.ta_map_id != ta_map.fingerprint()) {
    throw Error(ErrorCode::parse, "report was produced on TA map " + r.ta_map_id + ", not " + ta_map.fingerprint());
  }
  r.first_tick = field<std::int64_t>(doc, "first_tick");
  r.duration_ticks = field<std::int64_t>(doc, "duration_ticks");
  r.population = field<std::size_t>(doc, "population");
  r.occupied_enb_ticks = field<std::uint64_t>(doc, "occupied_enb_ticks");
  r.attached_ue_ticks = field<std::uint64_t>(doc, "attached_ue_ticks");
  r.tal_updates = field<std::uint64_t>(doc, "tal_updates");
  for (const json& row : field<json>(doc, "per_enb_pages")) {
    r.per_enb_pages[row.at(0).get<EnbId>()] = row.at(1).get<std::uint64_t>();
  }
  for (const json& row : field<json>(doc, "page_records")) {
    if (!row.is_array() || row.size() != 5) throw Error(ErrorCode::parse, "page record must have 5 fields");
    PageRecord p;
    p.tick = row[0].get<std::int64_t>();
    p.target_ue = row[1].get<UeId>();
    p.broadcast_tas = row[2].get<std::vector<TaId>>();
    for (TaId ta : p.broadcast_tas) {
      const auto& members = ta_map.members(ta);
      p.enbs_paged.insert(p.enbs_paged.end(), members.begin(), members.end());
    }
    std::sort(p.enbs_paged.begin(), p.enbs_paged.end());
    p.enbs_paged.erase(std::unique(p.enbs_paged.begin(), p.enbs_paged.end()), p.enbs_paged.end());
    if (p.enbs_paged.size() != row[3].get<std::size_t>()) {
      throw Error(ErrorCode::parse, "page record at tick " + std::to_string(p.tick) + " does not match the TA map");
    }
    p.enbs_with_users = row[4].get<std::uint32_t>();
    r.page_records.push_back(std::move(p));
  }
  return r;
}

json supportable_to_json(const SupportableUsers& users) { return supportable(users); }

json capacity_to_json(const CapacityEstimate& e) {
  return {{"page_budget_per_hour", e.page_budget_per_hour},
          {"load_max", e.load_max},
          {"load_p95", e.load_p95},
          {"load_median", e.load_median},
          {"users_max", supportable(e.users_max)},
          {"users_p95", supportable(e.users_p95)},
          {"users_median", supportable(e.users_median)}};
}

RunMetrics compute_metrics(const SimReport& report, const Topology& topology, double page_budget_per_second) {
  RunMetrics m;
  m.mode = report.config.mode;
  m.tal_length = report.config.mode == PagingMode::tal ? report.config.tal_length : 1;
  m.ta_count = topology.ta_map().ta_count();
  m.total_pages = report.total_pages();
  if (!report.page_records.empty()) {
    m.d_global = global_bulk_anonymity(report, static_cast<double>(topology.ta_map().enb_count()));
    m.median_area_km2 = area_anonymity(report, topology.positions_by_id()).median_km2;
  }
  if (report.occupied_enb_ticks > 0 && report.population >= 2) {
    m.d_local = local_bulk_anonymity(report, static_cast<double>(report.population));
  }
  std::vector<double> pages;
  for (const auto& [enb, count] : report.per_enb_pages) pages.push_back(static_cast<double>(count));
  std::sort(pages.begin(), pages.end());
  if (!pages.empty()) m.median_enb_pages = percentile(pages, 0.5);
  m.capacity = capacity_estimate(report, page_budget_per_hour(page_budget_per_second));
  return m;
}

json metrics_to_json(const RunMetrics& m) {
  return {{"mode", to_string(m.mode)},
          {"tal_length", m.tal_length},
          {"ta_count", m.ta_count},
          {"d_global", m.d_global},
          {"d_local", m.d_local},
          {"median_area_km2", m.median_area_km2},
          {"total_pages", m.total_pages},
          {"median_enb_pages", m.median_enb_pages},
          {"capacity", capacity_to_json(m.capacity)}};
}

}  // namespace pgpp
