#pragma once

#include <nlohmann/json.hpp>

#include "pgpp/anonymity.hpp"
#include "pgpp/capacity.hpp"
#include "pgpp/paging_sim.hpp"
#include "pgpp/topology.hpp"

namespace pgpp {

// Topology snapshot: sites with projected coordinates, TA membership and
// adjacency.
nlohmann::json topology_to_json(const Topology& topology);
// Rebuilds sites and the TA map from a snapshot.
LoadedTopology topology_from_json(const nlohmann::json& doc);

nlohmann::json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& doc);

// Page records are stored as [tick, ue, [tas], enb_count, enbs_with_users];
// the eNB lists are rebuilt from the TA map on load.
nlohmann::json report_to_json(const SimReport& report);
SimReport report_from_json(const nlohmann::json& doc, const TrackingAreaMap& ta_map);

nlohmann::json supportable_to_json(const SupportableUsers& users);
nlohmann::json capacity_to_json(const CapacityEstimate& estimate);

// One metrics row per run.
struct RunMetrics {
  PagingMode mode = PagingMode::conventional;
  int tal_length = 1;
  std::size_t ta_count = 0;
  double d_global = 0.0;
  double d_local = 0.0;
  double median_area_km2 = 0.0;
  std::uint64_t total_pages = 0;
  double median_enb_pages = 0.0;
  CapacityEstimate capacity;
};

// Global-bulk N is the eNB count; local-bulk N is the UE population.
RunMetrics compute_metrics(const SimReport& report, const Topology& topology, double page_budget_per_second);
nlohmann::json metrics_to_json(const RunMetrics& metrics);

}  // namespace pgpp
