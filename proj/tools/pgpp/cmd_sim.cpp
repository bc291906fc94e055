#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "pgpp/anonymity.hpp"
#include "pgpp/error.hpp"
#include "pgpp/experiment.hpp"
#include "pgpp/kmeans.hpp"
#include "pgpp/paging_log.hpp"
#include "pgpp/serialize.hpp"

namespace pgpp::cli {

namespace {

struct TopologyArgs {
  std::string sites_csv;
  std::string columns;
  SyntheticTopologyConfig synthetic;
  std::size_t custom_tas = 0;
  std::string out = "topology.json";
  std::string sites_out;
};

SiteCsvColumns parse_columns(const std::string& spec) {
  SiteCsvColumns columns;
  if (spec.empty()) return columns;
  if (spec == "opencellid") return SiteCsvColumns{"cell", "lat", "lon", "area"};
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  if (parts.size() != 4) throw Error(ErrorCode::config, "--columns expects id,lat,lon,ta or 'opencellid'");
  return SiteCsvColumns{parts[0], parts[1], parts[2], parts[3]};
}

void run_topology(const TopologyArgs& args) {
  std::vector<EnbSite> sites;
  if (args.sites_csv.empty()) {
    sites = synthesize_sites(args.synthetic);
  } else {
    std::ifstream in(args.sites_csv);
    if (!in) throw Error(ErrorCode::config, "cannot open " + args.sites_csv);
    sites = read_sites_csv(in, parse_columns(args.columns));
  }
  Topology topology = Topology::build(std::move(sites));
  if (args.custom_tas > 0) {
    topology = topology.with_ta_map(kmeans_tas(topology, args.custom_tas, args.synthetic.seed));
  }
  write_text(args.out, topology_to_json(topology).dump() + '\n');
  if (!args.sites_out.empty()) {
    std::ostringstream csv;
    write_sites_csv(csv, topology.sites());
    write_text(args.sites_out, csv.str());
  }
  std::cout << "eNBs " << topology.ta_map().enb_count() << ", TAs " << topology.ta_map().ta_count() << ", map "
            << topology.ta_map().fingerprint() << '\n';
}

int run_simulate(const std::string& config_path, const std::string& output_dir, unsigned workers) {
  KvConfig kv = KvConfig::load(config_path);
  ExperimentConfig config = experiment_from_kv(kv);
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (workers > 0) config.workers = workers;
  const ExperimentResult result = run_experiment(config);
  std::size_t total = result.manifest.at("points").size();
  std::cout << "wrote " << result.manifest_path.string() << " (" << total - result.failed_points << "/" << total
            << " points ok)\n";
  for (const auto& p : result.manifest.at("points")) {
    if (p.at("status") != "ok") std::cerr << "point " << p.at("hash").get<std::string>() << ": " << p.at("error").get<std::string>() << '\n';
  }
  return result.failed_points > 0 ? kExitPartial : kExitOk;
}

void print_metrics(const std::string& manifest_path, bool as_json) {
  const nlohmann::json manifest = read_json(manifest_path);
  if (as_json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : manifest.at("points")) {
      if (p.contains("summary")) rows.push_back(p.at("summary"));
    }
    std::cout << rows.dump(2) << '\n';
    return;
  }
  std::cout << "mode,tal_length,ta_count,total_pages,median_enb_pages,d_global,d_local,median_area_km2\n";
  for (const auto& p : manifest.at("points")) {
    if (!p.contains("summary")) continue;
    const auto& s = p.at("summary");
    std::cout << s.at("mode").get<std::string>() << ',' << s.at("tal_length") << ',' << s.at("ta_count") << ','
              << s.at("total_pages") << ',' << s.at("median_enb_pages") << ',' << s.at("d_global") << ','
              << s.at("d_local") << ',' << s.at("median_area_km2") << '\n';
  }
}

void run_analyze_log(const std::string& path, const std::string& out_dir) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open " + path);
  const auto log = read_paging_log_csv(in);
  const PagingLogAnalysis analysis = analyze_paging_log(log);
  std::ostringstream counts;
  counts << "identifier,pages\n";
  for (const auto& [id, n] : analysis.page_counts) counts << id << ',' << n << '\n';
  std::ostringstream intervals;
  intervals << "interval_s\n";
  for (double v : analysis.intervals) intervals << v << '\n';
  if (out_dir.empty()) {
    std::cout << counts.str();
    return;
  }
  write_text(std::filesystem::path(out_dir) / "page_counts.csv", counts.str());
  write_text(std::filesystem::path(out_dir) / "intervals.csv", intervals.str());
  std::cout << analysis.page_counts.size() << " identifiers, " << analysis.intervals.size() << " intervals\n";
}

}  // namespace

void register_sim_commands(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<TopologyArgs>();
  CLI::App* topo = app.add_subcommand("topology", "Build a topology snapshot from a site CSV or the synthetic generator");
  topo->add_option("--sites", args->sites_csv, "Site CSV (enb_id,lat,lon,ta_id)");
  topo->add_option("--columns", args->columns, "Column names id,lat,lon,ta or 'opencellid'");
  topo->add_option("--n-sites", args->synthetic.n_sites, "Synthetic site count");
  topo->add_option("--clusters", args->synthetic.n_clusters, "Synthetic urban clusters");
  topo->add_option("--ta-count", args->synthetic.ta_count, "Synthetic TA count");
  topo->add_option("--extent-km", args->synthetic.extent_km, "Synthetic square side");
  topo->add_option("--seed", args->synthetic.seed, "Seed");
  topo->add_option("--custom-tas", args->custom_tas, "Relabel TAs with k-means into this many areas");
  topo->add_option("--out", args->out, "Snapshot JSON");
  topo->add_option("--sites-out", args->sites_out, "Also write the deduplicated sites as CSV");
  topo->callback([args] { run_topology(*args); });

  auto sim_config = std::make_shared<std::string>();
  auto sim_out = std::make_shared<std::string>();
  auto sim_workers = std::make_shared<unsigned>(0);
  CLI::App* sim = app.add_subcommand("simulate", "Run a paging sweep from a key = value config file");
  sim->add_option("config", *sim_config, "Experiment config")->required();
  sim->add_option("--output-dir", *sim_out, "Override output_dir");
  sim->add_option("--workers", *sim_workers, "Override workers");
  sim->callback([=, &exit_code] { exit_code = run_simulate(*sim_config, *sim_out, *sim_workers); });

  auto manifest = std::make_shared<std::string>();
  auto as_json = std::make_shared<bool>(false);
  auto degree = std::make_shared<std::vector<double>>();
  CLI::App* metrics = app.add_subcommand("metrics", "Summarize sweep metrics or evaluate the degree of anonymity");
  metrics->add_option("--manifest", *manifest, "Sweep manifest.json");
  metrics->add_flag("--json", *as_json, "Print JSON rows");
  metrics->add_option("--degree", *degree, "S N: print log2(S)/log2(N)")->expected(2);
  metrics->callback([=] {
    if (degree->size() == 2) {
      std::cout << degree_of_anonymity((*degree)[0], (*degree)[1]) << '\n';
      return;
    }
    if (manifest->empty()) throw Error(ErrorCode::config, "metrics needs --manifest or --degree");
    print_metrics(*manifest, *as_json);
  });

  auto log_path = std::make_shared<std::string>();
  auto log_out = std::make_shared<std::string>();
  CLI::App* analyze = app.add_subcommand("analyze-log", "Page counts and inter-page intervals of a paging log CSV");
  analyze->add_option("log", *log_path, "CSV with timestamp,identifier")->required();
  analyze->add_option("--out-dir", *log_out, "Write page_counts.csv and intervals.csv here");
  analyze->callback([=] { run_analyze_log(*log_path, *log_out); });

  auto fig_manifest = std::make_shared<std::string>();
  auto fig_out = std::make_shared<std::string>("figures");
  CLI::App* figures = app.add_subcommand("figures", "Emit plot-ready CSVs from a sweep manifest");
  figures->add_option("manifest", *fig_manifest, "manifest.json")->required();
  figures->add_option("--out", *fig_out, "Output directory");
  figures->callback([=, &exit_code] {
    const std::filesystem::path path(*fig_manifest);
    const FigureEmission emitted = emit_figures_data(read_json(path), path.parent_path(), *fig_out);
    for (const auto& w : emitted.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : emitted.files) std::cout << f.string() << '\n';
    if (!emitted.warnings.empty()) exit_code = kExitPartial;
  });
}

}  // namespace pgpp::cli
