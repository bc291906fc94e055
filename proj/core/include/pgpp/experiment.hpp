#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgpp/kv_config.hpp"
#include "pgpp/paging_sim.hpp"
#include "pgpp/topology.hpp"

namespace pgpp {

struct ExperimentConfig {
  // Site CSV; empty selects the synthetic generator.
  std::string topology_csv;
  SyntheticTopologyConfig synthetic;
  // Mobility
  std::string trace_file;
  std::size_t n_cars = 500;
  std::size_t n_pedestrians = 500;
  std::int64_t duration_ticks = 720;
  // Traffic and capacity
  TrafficConfig traffic;
  double page_budget_per_sec = 525.0;
  // Sweep axes. Empty ta_counts keeps the topology's own TA labels.
  std::vector<PagingMode> modes{PagingMode::conventional, PagingMode::tal};
  std::vector<int> tal_lengths{16};
  std::vector<std::size_t> ta_counts;
  TalGrowth tal_growth = TalGrowth::region_growing;
  // AKA mass-attach run emitted alongside the sweep; 0 disables it.
  std::size_t aka_ues = 0;
  std::uint64_t seed = 1;
  std::string output_dir = "pgpp-out";
  unsigned workers = 1;
};

// Throws Error(config) naming the offending key.
ExperimentConfig experiment_from_kv(const KvConfig& kv);
KvConfig experiment_to_kv(const ExperimentConfig& config);
void validate(const ExperimentConfig& config, std::size_t site_count);

// One simulation run of a sweep.
struct SweepPoint {
  PagingMode mode = PagingMode::conventional;
  int tal_length = 1;
  // 0 = topology labels.
  std::size_t ta_count = 0;
};

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& config);

// Canonical text of one sweep point's full configuration and its hash, which
// names the output directory.
std::string canonical_point_config(const ExperimentConfig& config, const SweepPoint& point);
std::string point_hash(const ExperimentConfig& config, const SweepPoint& point);

struct ExperimentResult {
  std::filesystem::path manifest_path;
  nlohmann::json manifest;
  std::size_t failed_points = 0;
};

// Runs every sweep point and writes report.json, metrics.json and
// enb_pages.csv per point plus manifest.json. A failing point is recorded in
// the manifest; the others still run.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct FigureEmission {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

// Writes plot-ready CSVs (control_cdf, capacity, anonymity, area_cdf,
// attach_delay) from a manifest into `out_dir`.
FigureEmission emit_figures_data(const nlohmann::json& manifest, const std::filesystem::path& manifest_dir,
                                 const std::filesystem::path& out_dir);

}  // namespace pgpp
