#include <benchmark/benchmark.h>

#include "pgpp/mobility.hpp"
#include "pgpp/paging_sim.hpp"
#include "pgpp/topology.hpp"

using namespace pgpp;

namespace {

struct World {
  Topology topology;
  std::vector<AttachmentTimeline> timelines;
};

const World& world() {
  static const World w = [] {
    SyntheticTopologyConfig tc;
    tc.n_sites = 500;
    tc.ta_count = 50;
    Topology topo = Topology::build(synthesize_sites(tc));
    TraceSynthConfig mc;
    mc.n_cars = 500;
    mc.n_pedestrians = 500;
    std::vector<AttachmentTimeline> tl;
    for (const auto& tr : synth_traces(topo.region(), mc)) tl.push_back(attach_timeline(tr, topo.locator(), topo.ta_map()));
    return World{std::move(topo), std::move(tl)};
  }();
  return w;
}

void BM_RunSim(benchmark::State& state) {
  const World& w = world();
  SimConfig cfg;
  cfg.mode = state.range(0) == 1 ? PagingMode::conventional : PagingMode::tal;
  cfg.tal_length = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sim(w.timelines, w.topology.ta_map(), cfg));
}
BENCHMARK(BM_RunSim)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_BuildTopology(benchmark::State& state) {
  SyntheticTopologyConfig tc;
  tc.n_sites = static_cast<std::size_t>(state.range(0));
  tc.ta_count = tc.n_sites / 10;
  const auto sites = synthesize_sites(tc);
  for (auto _ : state) benchmark::DoNotOptimize(Topology::build(sites));
}
BENCHMARK(BM_BuildTopology)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_AttachTimeline(benchmark::State& state) {
  const World& w = world();
  TraceSynthConfig mc;
  mc.n_cars = 1;
  const auto traces = synth_traces(w.topology.region(), mc);
  for (auto _ : state) benchmark::DoNotOptimize(attach_timeline(traces[0], w.topology.locator(), w.topology.ta_map()));
}
BENCHMARK(BM_AttachTimeline);

}  // namespace
