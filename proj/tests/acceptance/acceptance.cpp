// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "pgpp/aka.hpp"
#include "pgpp/anonymity.hpp"
#include "pgpp/capacity.hpp"
#include "pgpp/experiment.hpp"
#include "pgpp/gateway.hpp"
#include "pgpp/kmeans.hpp"
#include "pgpp/mobility.hpp"
#include "pgpp/paging_sim.hpp"
#include "pgpp/serialize.hpp"
#include "pgpp/spend.hpp"
#include "pgpp/tokens.hpp"

using namespace pgpp;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes.
constexpr double kDegreeTolerance = 0.005;
constexpr std::size_t kRoundTripTokens = 10000;
constexpr std::size_t kRoundTripSlices = 24;
constexpr std::size_t kForgeries = 1000000;
constexpr int kDoubleSpendTrials = 1000;
constexpr double kMinVerifyPerSecond = 10000.0;
constexpr std::size_t kVerifySamples = 20000;
constexpr double kMinAreaRatio = 5.0;
constexpr double kMinGlobalDegreeAt16 = 0.5;
constexpr double kBudgetPerHour = 1890000.0;
constexpr std::size_t kMaxAkaUes = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

// Shared synthetic world: 500 eNBs in 50 TAs, 1,000 UEs over one hour.
struct World {
  Topology topology;
  std::vector<AttachmentTimeline> timelines;
};

const World& world() {
  static const World w = [] {
    SyntheticTopologyConfig tc;
    tc.n_sites = 500;
    tc.ta_count = 50;
    tc.seed = 2024;
    Topology topo = Topology::build(synthesize_sites(tc));
    TraceSynthConfig mc;
    mc.n_cars = 500;
    mc.n_pedestrians = 500;
    mc.duration_ticks = 720;
    mc.seed = 2025;
    std::vector<AttachmentTimeline> tl;
    for (const auto& tr : synth_traces(topo.region(), mc)) tl.push_back(attach_timeline(tr, topo.locator(), topo.ta_map()));
    return World{std::move(topo), std::move(tl)};
  }();
  return w;
}

SimReport simulate(PagingMode mode, int length, const TrackingAreaMap& map,
                   const std::vector<AttachmentTimeline>& timelines) {
  SimConfig cfg;
  cfg.mode = mode;
  cfg.tal_length = length;
  cfg.seed = 99;
  return run_sim(timelines, map, cfg);
}

tokens::SignedToken issue(const tokens::SliceKeySet& keys, std::uint64_t slice, RandomSource& random) {
  const tokens::Token t = tokens::Token::generate(slice, random);
  const auto& pub = keys.public_part.key(slice);
  const tokens::BlindedToken b = tokens::blind(t, pub, random);
  return {t, tokens::unblind(tokens::sign_blinded(b.blinded_message, keys.signing_keys[slice]), b.unblinding_secret, pub)};
}

const tokens::SliceKeySet& day_keys() {
  static const tokens::SliceKeySet k = tokens::gen_period_keys("acceptance", kRoundTripSlices);
  return k;
}

std::vector<tokens::SignedToken>& issued_tokens() {
  static std::vector<tokens::SignedToken> v;
  return v;
}

Outcome degree_fidelity() {
  const double d1 = degree_of_anonymity(1, 22437);
  const double d2 = degree_of_anonymity(223.09, 50000);
  return {d1 == 0.0 && std::abs(d2 - 0.50) <= kDegreeTolerance,
          "d(1, 22437) = " + num(d1) + ", d(223.09, 50000) = " + num(d2, 6)};
}

Outcome token_round_trip() {
  const auto& keys = day_keys();
  SystemRandom random;
  std::size_t ok = 0;
  auto& out = issued_tokens();
  out.clear();
  for (std::size_t i = 0; i < kRoundTripTokens; ++i) {
    const std::uint64_t slice = i % kRoundTripSlices;
    tokens::SignedToken st = issue(keys, slice, random);
    if (tokens::verify_signature(st, keys.public_part.key(slice))) ++ok;
    out.push_back(std::move(st));
  }
  tokens::InMemorySpentStore store;
  SeededRandom noise(7);
  std::size_t forged = 0;
  const std::size_t width = keys.public_part.key(0).modulus_bytes();
  for (std::size_t i = 0; i < kForgeries; ++i) {
    tokens::SignedToken f{tokens::Token::generate(i % kRoundTripSlices, noise), Bytes(width)};
    noise.fill(f.signature);
    f.signature[0] &= 0x7f;
    if (tokens::verify_and_spend(f, keys.public_part, store, f.token.slice_index) == tokens::Verdict::accepted) ++forged;
  }
  return {ok == kRoundTripTokens && forged == 0,
          std::to_string(ok) + "/" + std::to_string(kRoundTripTokens) + " verify, " + std::to_string(forged) + "/" +
              std::to_string(kForgeries) + " forgeries accepted"};
}

// Runs `presenters` threads against one token; returns the accept count.
int present_concurrently(int presenters, const std::function<bool(int)>& present) {
  std::atomic<int> accepted{0};
  std::barrier sync(presenters);
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(presenters));
  for (int p = 0; p < presenters; ++p) {
    threads.emplace_back([&, p] {
      sync.arrive_and_wait();
      if (present(p)) ++accepted;
    });
  }
  for (auto& t : threads) t.join();
  return accepted;
}

Outcome double_spend_linearization() {
  const auto& keys = day_keys();
  SystemRandom random;
  const fs::path db = fs::temp_directory_path() / ("pgpp_accept_" + std::to_string(::getpid()) + ".db");
  fs::remove(db);
  std::ostringstream detail;
  bool pass = true;
  {
    tokens::InMemorySpentStore shared;
    tokens::SqliteSpentStore store_a(db.string());
    tokens::SqliteSpentStore store_b(db.string());
    const gw::SliceClock clock{0, 3600};
    gw::Gateway a(keys.public_part, store_a, clock);
    gw::Gateway b(keys.public_part, store_b, clock);
    for (int presenters : {2, 8, 64}) {
      int bad_store = 0;
      int bad_gateways = 0;
      for (int trial = 0; trial < kDoubleSpendTrials; ++trial) {
        const tokens::SignedToken t = issue(keys, 0, random);
        const int direct = present_concurrently(presenters, [&](int) {
          return tokens::verify_and_spend(t, keys.public_part, shared, 0) == tokens::Verdict::accepted;
        });
        if (direct != 1) ++bad_store;
        const tokens::SignedToken u = issue(keys, 0, random);
        const int via_gateways = present_concurrently(presenters, [&](int p) {
          gw::Gateway& g = p % 2 == 0 ? a : b;
          return g.authenticate("10.0." + std::to_string(p) + ".1", u, 10).authorized;
        });
        if (via_gateways != 1) ++bad_gateways;
      }
      pass = pass && bad_store == 0 && bad_gateways == 0;
      detail << "T=" << presenters << ": " << (kDoubleSpendTrials - bad_store) << "/" << kDoubleSpendTrials
             << " store, " << (kDoubleSpendTrials - bad_gateways) << "/" << kDoubleSpendTrials << " two gateways; ";
    }
  }
  fs::remove(db);
  fs::remove(db.string() + "-wal");
  fs::remove(db.string() + "-shm");
  std::string text = detail.str();
  text.resize(text.size() - 2);
  return {pass, text};
}

Outcome verification_throughput() {
  const auto& keys = day_keys();
  auto& tokens_ = issued_tokens();
  if (tokens_.empty()) {
    SystemRandom random;
    for (std::size_t i = 0; i < 1000; ++i) tokens_.push_back(issue(keys, i % kRoundTripSlices, random));
  }
  std::size_t ok = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < kVerifySamples; ++i) {
    const auto& st = tokens_[i % tokens_.size()];
    if (tokens::verify_signature(st, keys.public_part.key(st.token.slice_index))) ++ok;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double rate = static_cast<double>(kVerifySamples) / secs;
  return {ok == kVerifySamples && rate >= kMinVerifyPerSecond,
          num(rate, 6) + " RSA-2048 verifications/s on one thread (" + num(1e6 / rate, 3) + " us each)"};
}

Outcome paging_accounting() {
  const World& w = world();
  bool pass = true;
  std::ostringstream detail;
  for (auto [mode, len] : {std::pair{PagingMode::conventional, 1}, std::pair{PagingMode::tal, 16}}) {
    const SimReport r = simulate(mode, len, w.topology.ta_map(), w.timelines);
    const auto recount = oracle::recount_pages(r, w.topology.ta_map());
    std::uint64_t total = 0;
    for (const auto& [e, n] : recount) total += n;
    pass = pass && recount == r.per_enb_pages && total == r.total_pages();
    detail << to_string(mode) << (mode == PagingMode::tal ? std::to_string(len) : "") << ": " << r.total_pages()
           << " pages, recount " << total << "; ";
  }
  std::string text = detail.str();
  text.resize(text.size() - 2);
  return {pass, text + " (" + std::to_string(w.topology.ta_map().enb_count()) + " eNBs, " +
                    std::to_string(w.timelines.size()) + " UEs, 720 ticks)"};
}

Outcome tal_trends() {
  const World& w = world();
  const auto positions = w.topology.positions_by_id();
  const double enbs = static_cast<double>(w.topology.ta_map().enb_count());
  const SimReport conv = simulate(PagingMode::conventional, 1, w.topology.ta_map(), w.timelines);
  const double conv_area = area_anonymity(conv, positions).median_km2;
  std::uint64_t prev_pages = 0;
  double prev_d = -1;
  bool pages_up = true;
  bool d_up = true;
  double d16 = 0;
  double area16 = 0;
  std::ostringstream detail;
  for (int len : {1, 2, 4, 8, 16}) {
    const SimReport r = simulate(PagingMode::tal, len, w.topology.ta_map(), w.timelines);
    const double d = global_bulk_anonymity(r, enbs);
    if (r.total_pages() <= prev_pages) pages_up = false;
    if (d < prev_d) d_up = false;
    prev_pages = r.total_pages();
    prev_d = d;
    if (len == 16) {
      d16 = d;
      area16 = area_anonymity(r, positions).median_km2;
    }
    detail << "L" << len << " pages=" << r.total_pages() << " d=" << num(d, 3) << "; ";
  }
  const double ratio = conv_area > 0 ? area16 / conv_area : 0.0;
  detail << "median area " << num(conv_area) << " -> " << num(area16) << " km2 (x" << num(ratio, 3) << ")";
  return {pages_up && d_up && d16 > kMinGlobalDegreeAt16 && ratio >= kMinAreaRatio, detail.str()};
}

Outcome custom_ta_trend() {
  const World& w = world();
  std::vector<double> medians;
  std::ostringstream detail;
  for (std::size_t k : {25, 100, 500}) {
    const Topology custom = w.topology.with_ta_map(kmeans_tas(w.topology, k, derive_seed(7, "custom-tas", k)));
    std::vector<AttachmentTimeline> relabeled;
    for (const auto& t : w.timelines) relabeled.push_back(relabel_timeline(t, custom.ta_map()));
    const SimReport r = simulate(PagingMode::tal, 16, custom.ta_map(), relabeled);
    std::vector<double> pages;
    for (const auto& [e, n] : r.per_enb_pages) pages.push_back(static_cast<double>(n));
    std::sort(pages.begin(), pages.end());
    medians.push_back(percentile(pages, 0.5));
    detail << k << " TAs: median " << num(medians.back()) << " pages/eNB; ";
  }
  std::string text = detail.str();
  text.resize(text.size() - 2);
  return {medians[0] > medians[1] && medians[1] > medians[2], text};
}

Outcome capacity_constant() {
  const double budget = page_budget_per_hour(525.0);
  const World& w = world();
  const SimReport r = simulate(PagingMode::conventional, 1, w.topology.ta_map(), w.timelines);
  const RunMetrics m = compute_metrics(r, w.topology, 525.0);
  return {budget == kBudgetPerHour && m.capacity.page_budget_per_hour == kBudgetPerHour,
          "525 pages/s -> " + num(m.capacity.page_budget_per_hour, 10) + " pages/hour"};
}

Outcome aka_law() {
  bool pass = true;
  int checked = 0;
  for (std::size_t n = 1; n <= kMaxAkaUes; ++n) {
    aka::MassAttachConfig cfg;
    cfg.n_ues = n;
    cfg.arrival = aka::ArrivalPattern::sequential;
    cfg.seed = n;
    auto outcomes = aka::simulate_mass_attach(cfg).outcomes;
    std::stable_sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.start_ms < b.start_ms; });
    const auto expected = oracle::sqn_ledger_failures(n);
    for (std::size_t k = 0; k < n; ++k) {
      pass = pass && outcomes[k].sync_failures == expected[k] && outcomes[k].result == aka::AttachResult::attached;
      ++checked;
    }
    cfg.shared_imsi = false;
    for (const auto& o : aka::simulate_mass_attach(cfg).outcomes) pass = pass && o.sync_failures == 0;
  }
  return {pass, std::to_string(checked) + " sequential shared-IMSI attaches match the SQN ledger; unique IMSIs fail 0 times"};
}

std::map<std::string, std::string> data_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).generic_string();
    if (rel == "manifest.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[rel] = ss.str();
  }
  return out;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / ("pgpp_accept_runs_" + std::to_string(::getpid()));
  fs::remove_all(base);
  ExperimentConfig cfg;
  cfg.synthetic.n_sites = 300;
  cfg.synthetic.ta_count = 30;
  cfg.n_cars = 150;
  cfg.n_pedestrians = 150;
  cfg.tal_lengths = {4, 16};
  cfg.ta_counts = {10, 30};
  cfg.aka_ues = 50;
  cfg.seed = 5;
  cfg.output_dir = (base / "a").string();
  const ExperimentResult a = run_experiment(cfg);
  cfg.output_dir = (base / "b").string();
  cfg.workers = 3;
  const ExperimentResult b = run_experiment(cfg);
  emit_figures_data(a.manifest, base / "a", base / "a" / "figures");
  emit_figures_data(b.manifest, base / "b", base / "b" / "figures");
  const auto ta = data_tree(base / "a");
  const auto tb = data_tree(base / "b");
  fs::remove_all(base);
  const bool pass = a.failed_points == 0 && b.failed_points == 0 && ta == tb && !ta.empty();
  return {pass, std::to_string(ta.size()) + " data files compared across two runs (1 and 3 workers), " +
                    (ta == tb ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 degree of anonymity worked values", degree_fidelity},
      {"2 token round trip and forgery rejection", token_round_trip},
      {"3 double-spend linearization", double_spend_linearization},
      {"4 verification throughput", verification_throughput},
      {"5 paging accounting recount", paging_accounting},
      {"6 TAL length trends", tal_trends},
      {"7 custom TA count trend", custom_ta_trend},
      {"8 capacity budget constant", capacity_constant},
      {"9 AKA sync failure law", aka_law},
      {"10 byte-identical reruns", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << name << "] " << o.detail << " (" << num(secs, 3) << " s)"
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
