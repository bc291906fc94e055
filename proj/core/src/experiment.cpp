#include "pgpp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pgpp/aka.hpp"
#include "pgpp/anonymity.hpp"
#include "pgpp/crypto.hpp"
#include "pgpp/error.hpp"
#include "pgpp/kmeans.hpp"
#include "pgpp/serialize.hpp"

namespace pgpp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kKnownKeys = {
    "topology_csv",     "synth.n_sites",        "synth.n_clusters", "synth.ta_count",   "synth.extent_km",
    "synth.center_lat", "synth.center_lon",     "synth.clustered_fraction",             "trace_file",
    "n_cars",           "n_pedestrians",        "duration_ticks",   "call_fraction",    "call_duration_ticks",
    "page_budget_per_sec",                      "modes",            "tal_lengths",      "ta_counts",
    "tal_growth",       "aka_ues",              "seed",             "output_dir",       "workers",
};

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_same_v<T, PagingMode>) {
      out += to_string(items[i]);
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

std::size_t non_negative(const KvConfig& kv, std::string_view key, std::int64_t fallback) {
  const std::int64_t v = kv.get_int(key, fallback);
  if (v < 0) throw Error(ErrorCode::config, std::string(key) + " must not be negative");
  return static_cast<std::size_t>(v);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

json kv_echo(const KvConfig& kv) {
  json out = json::object();
  for (const auto& [key, value] : kv.entries()) out[key] = value;
  return out;
}

}  // namespace

ExperimentConfig experiment_from_kv(const KvConfig& kv) {
  if (const auto unknown = kv.unknown_keys(kKnownKeys); !unknown.empty()) {
    throw Error(ErrorCode::config, "unknown config key '" + unknown.front() + "'");
  }
  ExperimentConfig c;
  c.topology_csv = kv.get_string("topology_csv");
  c.synthetic.n_sites = non_negative(kv, "synth.n_sites", static_cast<std::int64_t>(c.synthetic.n_sites));
  c.synthetic.n_clusters = non_negative(kv, "synth.n_clusters", static_cast<std::int64_t>(c.synthetic.n_clusters));
  c.synthetic.ta_count = non_negative(kv, "synth.ta_count", static_cast<std::int64_t>(c.synthetic.ta_count));
  c.synthetic.extent_km = kv.get_double("synth.extent_km", c.synthetic.extent_km);
  c.synthetic.center.lat = kv.get_double("synth.center_lat", c.synthetic.center.lat);
  c.synthetic.center.lon = kv.get_double("synth.center_lon", c.synthetic.center.lon);
  c.synthetic.clustered_fraction = kv.get_double("synth.clustered_fraction", c.synthetic.clustered_fraction);
  c.trace_file = kv.get_string("trace_file");
  c.n_cars = non_negative(kv, "n_cars", static_cast<std::int64_t>(c.n_cars));
  c.n_pedestrians = non_negative(kv, "n_pedestrians", static_cast<std::int64_t>(c.n_pedestrians));
  c.duration_ticks = kv.get_int("duration_ticks", c.duration_ticks);
  c.traffic.call_fraction = kv.get_double("call_fraction", c.traffic.call_fraction);
  c.traffic.call_duration_ticks = kv.get_int("call_duration_ticks", c.traffic.call_duration_ticks);
  c.page_budget_per_sec = kv.get_double("page_budget_per_sec", c.page_budget_per_sec);
  if (kv.has("modes")) {
    c.modes.clear();
    for (const std::string& m : kv.get_list("modes")) {
      try {
        c.modes.push_back(parse_paging_mode(m));
      } catch (const Error&) {
        throw Error(ErrorCode::config, "modes: unknown paging mode '" + m + "'");
      }
    }
  }
  if (kv.has("tal_lengths")) {
    c.tal_lengths.clear();
    for (std::int64_t v : kv.get_int_list("tal_lengths")) c.tal_lengths.push_back(static_cast<int>(v));
  }
  if (kv.has("ta_counts")) {
    c.ta_counts.clear();
    for (std::int64_t v : kv.get_int_list("ta_counts")) {
      if (v < 1) throw Error(ErrorCode::config, "ta_counts entries must be positive");
      c.ta_counts.push_back(static_cast<std::size_t>(v));
    }
  }
  const std::string growth = kv.get_string("tal_growth", "region_growing");
  if (growth == "region_growing") {
    c.tal_growth = TalGrowth::region_growing;
  } else if (growth == "anchor_adjacent") {
    c.tal_growth = TalGrowth::anchor_adjacent;
  } else {
    throw Error(ErrorCode::config, "tal_growth: unknown value '" + growth + "'");
  }
  c.aka_ues = non_negative(kv, "aka_ues", static_cast<std::int64_t>(c.aka_ues));
  const std::int64_t seed = kv.get_int("seed", static_cast<std::int64_t>(c.seed));
  c.seed = static_cast<std::uint64_t>(seed);
  c.synthetic.seed = c.seed;
  c.output_dir = kv.get_string("output_dir", c.output_dir);
  c.workers = static_cast<unsigned>(non_negative(kv, "workers", c.workers));
  return c;
}

KvConfig experiment_to_kv(const ExperimentConfig& c) {
  KvConfig kv;
  kv.set("topology_csv", c.topology_csv);
  kv.set("synth.n_sites", std::to_string(c.synthetic.n_sites));
  kv.set("synth.n_clusters", std::to_string(c.synthetic.n_clusters));
  kv.set("synth.ta_count", std::to_string(c.synthetic.ta_count));
  kv.set("synth.extent_km", fmt(c.synthetic.extent_km));
  kv.set("synth.center_lat", fmt(c.synthetic.center.lat));
  kv.set("synth.center_lon", fmt(c.synthetic.center.lon));
  kv.set("synth.clustered_fraction", fmt(c.synthetic.clustered_fraction));
  kv.set("trace_file", c.trace_file);
  kv.set("n_cars", std::to_string(c.n_cars));
  kv.set("n_pedestrians", std::to_string(c.n_pedestrians));
  kv.set("duration_ticks", std::to_string(c.duration_ticks));
  kv.set("call_fraction", fmt(c.traffic.call_fraction));
  kv.set("call_duration_ticks", std::to_string(c.traffic.call_duration_ticks));
  kv.set("page_budget_per_sec", fmt(c.page_budget_per_sec));
  kv.set("modes", join(c.modes));
  kv.set("tal_lengths", join(c.tal_lengths));
  kv.set("ta_counts", join(c.ta_counts));
  kv.set("tal_growth", c.tal_growth == TalGrowth::region_growing ? "region_growing" : "anchor_adjacent");
  kv.set("aka_ues", std::to_string(c.aka_ues));
  kv.set("seed", std::to_string(c.seed));
  kv.set("output_dir", c.output_dir);
  kv.set("workers", std::to_string(c.workers));
  return kv;
}

void validate(const ExperimentConfig& c, std::size_t site_count) {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::config, msg); };
  if (c.modes.empty()) fail("modes: at least one paging mode is required");
  for (int len : c.tal_lengths) {
    if (len < 1 || len > kMaxTalLength) fail("tal_lengths: " + std::to_string(len) + " is outside 1..16");
  }
  if (std::find(c.modes.begin(), c.modes.end(), PagingMode::tal) != c.modes.end() && c.tal_lengths.empty()) {
    fail("tal_lengths: required when modes includes tal");
  }
  for (std::size_t k : c.ta_counts) {
    if (k < 1 || k > site_count) {
      fail("ta_counts: " + std::to_string(k) + " exceeds the " + std::to_string(site_count) + " sites");
    }
  }
  if (!(c.traffic.call_fraction >= 0.0 && c.traffic.call_fraction <= 1.0)) fail("call_fraction must be in [0, 1]");
  if (c.traffic.call_duration_ticks < 1) fail("call_duration_ticks must be at least 1");
  if (c.duration_ticks < 1) fail("duration_ticks must be at least 1");
  if (!(c.page_budget_per_sec > 0.0)) fail("page_budget_per_sec must be positive");
  if (c.trace_file.empty() && c.n_cars + c.n_pedestrians == 0) fail("n_cars + n_pedestrians must be positive");
  if (c.workers < 1) fail("workers must be at least 1");
  if (c.output_dir.empty()) fail("output_dir must not be empty");
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& config) {
  std::vector<SweepPoint> out;
  std::vector<std::size_t> ta_counts = config.ta_counts;
  if (ta_counts.empty()) ta_counts.push_back(0);
  for (std::size_t k : ta_counts) {
    for (PagingMode mode : config.modes) {
      if (mode == PagingMode::conventional) {
        out.push_back(SweepPoint{mode, 1, k});
      } else {
        for (int len : config.tal_lengths) out.push_back(SweepPoint{mode, len, k});
      }
    }
  }
  return out;
}

std::string canonical_point_config(const ExperimentConfig& config, const SweepPoint& point) {
  KvConfig kv = experiment_to_kv(config);
  // Sweep axes and run plumbing do not affect a point's data.
  for (const char* key : {"modes", "tal_lengths", "ta_counts", "output_dir", "workers", "aka_ues"}) kv.set(key, "-");
  KvConfig trimmed;
  for (const auto& [key, value] : kv.entries()) {
    if (value != "-") trimmed.set(key, value);
  }
  trimmed.set("point.mode", std::string(to_string(point.mode)));
  trimmed.set("point.tal_length", std::to_string(point.tal_length));
  trimmed.set("point.ta_count", std::to_string(point.ta_count));
  return trimmed.to_string();
}

std::string point_hash(const ExperimentConfig& config, const SweepPoint& point) {
  const Digest d = sha256(as_bytes(canonical_point_config(config, point)));
  return to_hex(std::span<const std::uint8_t>(d.data(), 8));
}

namespace {

struct PreparedMap {
  std::size_t ta_count = 0;
  Topology topology;
  std::vector<AttachmentTimeline> timelines;
};

struct PointOutcome {
  json entry;
  bool failed = false;
};

std::string enb_pages_csv(const SimReport& report, const TrackingAreaMap& ta_map) {
  std::string out = "enb_id,ta_id,pages\n";
  for (const auto& [enb, pages] : report.per_enb_pages) {
    out += std::to_string(enb) + ',' + std::to_string(ta_map.ta_of(enb)) + ',' + std::to_string(pages) + '\n';
  }
  return out;
}

std::string areas_csv(const AreaReport& areas) {
  std::string out = "area_km2\n";
  for (double a : areas.areas_km2) out += fmt(a) + '\n';
  return out;
}

PointOutcome run_point(const ExperimentConfig& config, const SweepPoint& point, const PreparedMap& map,
                       const fs::path& root) {
  const std::string hash = point_hash(config, point);
  const fs::path rel = fs::path("runs") / hash;
  PointOutcome out;
  out.entry = {{"hash", hash},
               {"mode", to_string(point.mode)},
               {"tal_length", point.tal_length},
               {"ta_count", point.ta_count},
               {"dir", rel.generic_string()}};
  try {
    SimConfig sim;
    sim.mode = point.mode;
    sim.tal_length = point.tal_length;
    sim.tal_growth = config.tal_growth;
    sim.traffic = config.traffic;
    sim.seed = config.seed;
    const SimReport report = run_sim(map.timelines, map.topology.ta_map(), sim);
    const RunMetrics metrics = compute_metrics(report, map.topology, config.page_budget_per_sec);
    const AreaReport areas = area_anonymity(report, map.topology.positions_by_id());

    const json echo = KvConfig::parse_string(canonical_point_config(config, point)).entries();
    json report_doc = report_to_json(report);
    report_doc["config_echo"] = echo;
    json metrics_doc = metrics_to_json(metrics);
    metrics_doc["config_echo"] = echo;

    fs::create_directories(root / rel);
    write_file(root / rel / "report.json", report_doc.dump() + '\n');
    write_file(root / rel / "metrics.json", metrics_doc.dump(2) + '\n');
    write_file(root / rel / "enb_pages.csv", enb_pages_csv(report, map.topology.ta_map()));
    write_file(root / rel / "areas.csv", areas_csv(areas));
    out.entry["status"] = "ok";
    out.entry["report"] = (rel / "report.json").generic_string();
    out.entry["metrics"] = (rel / "metrics.json").generic_string();
    out.entry["enb_pages"] = (rel / "enb_pages.csv").generic_string();
    out.entry["areas"] = (rel / "areas.csv").generic_string();
    out.entry["summary"] = metrics_to_json(metrics);
  } catch (const std::exception& e) {
    out.failed = true;
    out.entry["status"] = "failed";
    out.entry["error"] = e.what();
  }
  return out;
}

json run_aka(const ExperimentConfig& config, const fs::path& root) {
  json entry = json::object();
  fs::create_directories(root / "aka");
  for (const bool shared : {true, false}) {
    aka::MassAttachConfig ac;
    ac.n_ues = config.aka_ues;
    ac.shared_imsi = shared;
    ac.seed = config.seed;
    const aka::MassAttachReport report = aka::simulate_mass_attach(ac);
    std::string lines;
    for (const auto& o : report.outcomes) lines += aka::outcome_to_json(o).dump() + '\n';
    const std::string name = shared ? "attach_shared.jsonl" : "attach_unique.jsonl";
    write_file(root / "aka" / name, lines);
    entry[shared ? "shared" : "unique"] = (fs::path("aka") / name).generic_string();
  }
  return entry;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  std::vector<EnbSite> sites;
  if (config.topology_csv.empty()) {
    sites = synthesize_sites(config.synthetic);
  } else {
    std::ifstream in(config.topology_csv);
    if (!in) throw Error(ErrorCode::config, "cannot open topology_csv " + config.topology_csv);
    sites = read_sites_csv(in);
  }
  const Topology base = Topology::build(std::move(sites));
  validate(config, base.sites().size());

  std::vector<MobilityTrace> traces;
  if (config.trace_file.empty()) {
    TraceSynthConfig tc;
    tc.n_cars = config.n_cars;
    tc.n_pedestrians = config.n_pedestrians;
    tc.duration_ticks = config.duration_ticks;
    tc.seed = derive_seed(config.seed, "traces");
    traces = synth_traces(base.region(), tc);
  } else {
    std::ifstream in(config.trace_file);
    if (!in) throw Error(ErrorCode::config, "cannot open trace_file " + config.trace_file);
    traces = read_traces_csv(in);
  }
  std::vector<AttachmentTimeline> base_timelines;
  base_timelines.reserve(traces.size());
  for (const MobilityTrace& t : traces) base_timelines.push_back(attach_timeline(t, base.locator(), base.ta_map()));

  std::vector<std::size_t> ta_counts = config.ta_counts;
  if (ta_counts.empty()) ta_counts.push_back(0);
  std::map<std::size_t, PreparedMap> maps;
  for (std::size_t k : ta_counts) {
    if (maps.contains(k)) continue;
    if (k == 0) {
      maps.emplace(k, PreparedMap{k, base, base_timelines});
      continue;
    }
    Topology custom = base.with_ta_map(kmeans_tas(base, k, derive_seed(config.seed, "custom-tas", k)));
    std::vector<AttachmentTimeline> relabeled;
    relabeled.reserve(base_timelines.size());
    for (const auto& t : base_timelines) relabeled.push_back(relabel_timeline(t, custom.ta_map()));
    maps.emplace(k, PreparedMap{k, std::move(custom), std::move(relabeled)});
  }

  const fs::path root(config.output_dir);
  fs::create_directories(root);
  write_file(root / "topology.json", topology_to_json(base).dump() + '\n');

  const std::vector<SweepPoint> points = expand_sweep(config);
  std::vector<PointOutcome> outcomes(points.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      outcomes[i] = run_point(config, points[i], maps.at(points[i].ta_count), root);
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentResult result;
  json entries = json::array();
  for (auto& o : outcomes) {
    if (o.failed) ++result.failed_points;
    entries.push_back(std::move(o.entry));
  }
  json manifest = {{"metadata", {{"created_at", utc_timestamp()}, {"tool", "pgpp"}}},
                   {"config", kv_echo(experiment_to_kv(config))},
                   {"topology", {{"path", "topology.json"},
                                 {"ta_map_id", base.ta_map().fingerprint()},
                                 {"enb_count", base.ta_map().enb_count()},
                                 {"population", traces.size()}}},
                   {"points", std::move(entries)}};
  if (config.aka_ues > 0) manifest["aka"] = run_aka(config, root);
  result.manifest_path = root / "manifest.json";
  write_file(result.manifest_path, manifest.dump(2) + '\n');
  result.manifest = std::move(manifest);
  return result;
}

FigureEmission emit_figures_data(const json& manifest, const fs::path& manifest_dir, const fs::path& out_dir) {
  FigureEmission out;
  std::string control = "enb_id,pages,mode,tal_length,ta_count\n";
  std::string capacity = "mode,tal_length,ta_count,load_max,load_p95,load_median,users_max,users_p95,users_median\n";
  std::string anonymity = "mode,tal_length,ta_count,d_global,d_local,total_pages,median_enb_pages\n";
  std::string area = "mode,tal_length,ta_count,area_km2\n";
  std::string attach = "imsi,bin_start_ms,count,fraction\n";

  const auto users = [](const json& v) { return v.is_null() ? std::string() : fmt(v.get<double>()); };
  const json points = manifest.value("points", json::array());
  for (const json& p : points) {
    const std::string label = p.value("mode", "?") + ',' + std::to_string(p.value("tal_length", 0)) + ',' +
                              std::to_string(p.value("ta_count", 0));
    if (p.value("status", "") != "ok") {
      out.warnings.push_back("run " + p.value("hash", "?") + " (" + label + ") failed; skipped");
      continue;
    }
    try {
      const json metrics = json::parse(read_file(manifest_dir / p.at("metrics").get<std::string>()));
      const json& cap = metrics.at("capacity");
      capacity += label + ',' + fmt(cap.at("load_max").get<double>()) + ',' + fmt(cap.at("load_p95").get<double>()) +
                  ',' + fmt(cap.at("load_median").get<double>()) + ',' + users(cap.at("users_max")) + ',' +
                  users(cap.at("users_p95")) + ',' + users(cap.at("users_median")) + '\n';
      anonymity += label + ',' + fmt(metrics.at("d_global").get<double>()) + ',' +
                   fmt(metrics.at("d_local").get<double>()) + ',' +
                   std::to_string(metrics.at("total_pages").get<std::uint64_t>()) + ',' +
                   fmt(metrics.at("median_enb_pages").get<double>()) + '\n';

      std::istringstream pages(read_file(manifest_dir / p.at("enb_pages").get<std::string>()));
      std::string line;
      std::getline(pages, line);
      const std::string suffix = ',' + p.at("mode").get<std::string>() + ',' +
                                 std::to_string(p.at("tal_length").get<int>()) + ',' +
                                 std::to_string(p.at("ta_count").get<std::size_t>());
      while (std::getline(pages, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.rfind(',');
        control += line.substr(0, c1) + ',' + line.substr(c2 + 1) + suffix + '\n';
      }

      std::istringstream areas(read_file(manifest_dir / p.at("areas").get<std::string>()));
      std::getline(areas, line);
      while (std::getline(areas, line)) {
        if (!line.empty()) area += label + ',' + line + '\n';
      }
    } catch (const std::exception& e) {
      out.warnings.push_back("run " + p.value("hash", "?") + " (" + label + "): " + e.what());
    }
  }

  if (manifest.contains("aka")) {
    for (const char* kind : {"shared", "unique"}) {
      try {
        std::istringstream lines(read_file(manifest_dir / manifest.at("aka").at(kind).get<std::string>()));
        std::vector<aka::AttachOutcome> outcomes;
        std::string line;
        while (std::getline(lines, line)) {
          if (line.empty()) continue;
          const json row = json::parse(line);
          aka::AttachOutcome o;
          o.total_delay_ms = row.at("total_delay_ms").get<double>();
          outcomes.push_back(o);
        }
        for (const aka::DelayBin& b : aka::delay_histogram(outcomes)) {
          attach += std::string(kind) + ',' + fmt(b.start_ms) + ',' + std::to_string(b.count) + ',' + fmt(b.density) +
                    '\n';
        }
      } catch (const std::exception& e) {
        out.warnings.push_back(std::string("attach delays (") + kind + "): " + e.what());
      }
    }
  }

  fs::create_directories(out_dir);
  const std::pair<const char*, const std::string*> files[] = {{"control_cdf.csv", &control},
                                                              {"capacity.csv", &capacity},
                                                              {"anonymity.csv", &anonymity},
                                                              {"area_cdf.csv", &area},
                                                              {"attach_delay.csv", &attach}};
  for (const auto& [name, text] : files) {
    write_file(out_dir / name, *text);
    out.files.push_back(out_dir / name);
  }
  return out;
}

}  // namespace pgpp
