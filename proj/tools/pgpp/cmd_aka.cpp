#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "pgpp/aka.hpp"

namespace pgpp::cli {

namespace {

struct AkaArgs {
  aka::MassAttachConfig config;
  bool sequential = false;
  std::string out = "attach.jsonl";
  std::string histogram = "attach_delay.csv";
  double bin_ms = 50.0;
};

void run(AkaArgs& a) {
  a.config.arrival = a.sequential ? aka::ArrivalPattern::sequential : aka::ArrivalPattern::concurrent;
  const aka::MassAttachReport report = aka::simulate_mass_attach(a.config);
  std::ostringstream lines;
  std::size_t failures = 0;
  double last = 0.0;
  for (const auto& o : report.outcomes) {
    lines << aka::outcome_to_json(o).dump() << '\n';
    failures += static_cast<std::size_t>(o.sync_failures);
    last = std::max(last, o.start_ms + o.total_delay_ms);
  }
  write_text(a.out, lines.str());
  std::ostringstream csv;
  csv << "bin_start_ms,count,fraction\n";
  for (const auto& b : aka::delay_histogram(report.outcomes, a.bin_ms)) {
    csv << b.start_ms << ',' << b.count << ',' << b.density << '\n';
  }
  write_text(a.histogram, csv.str());
  std::cout << report.successful_attaches << "/" << a.config.n_ues << " attached, " << failures
            << " sync failures, all done after " << last << " ms\n";
}

}  // namespace

void register_aka_commands(CLI::App& app, int& /*exit_code*/) {
  auto a = std::make_shared<AkaArgs>();
  CLI::App* aka_cmd = app.add_subcommand("aka", "Attach procedure model");
  aka_cmd->require_subcommand(1);
  CLI::App* sim = aka_cmd->add_subcommand("simulate", "Mass attach against one HSS");
  sim->add_option("--ues", a->config.n_ues, "Number of UEs")->check(CLI::PositiveNumber);
  sim->add_flag("--shared-imsi,!--unique-imsi", a->config.shared_imsi, "All UEs share one IMSI");
  sim->add_flag("--sequential", a->sequential, "Each UE starts after the previous one attached");
  sim->add_option("--arrival-window-ms", a->config.arrival_window_ms, "Spread of concurrent arrivals");
  sim->add_option("--latency-ms", a->config.latency.mean_ms, "Mean latency of one attach round");
  sim->add_option("--jitter", a->config.latency.jitter, "Relative latency jitter");
  sim->add_option("--hss-service-ms", a->config.latency.hss_service_ms, "HSS time per request");
  sim->add_option("--window", a->config.window, "SQN acceptance window");
  sim->add_option("--seed", a->config.seed, "Seed");
  sim->add_option("--out", a->out, "AttachOutcome JSONL");
  sim->add_option("--histogram", a->histogram, "Delay histogram CSV");
  sim->add_option("--bin-ms", a->bin_ms, "Histogram bin width")->check(CLI::PositiveNumber);
  sim->callback([a] { run(*a); });
}

}  // namespace pgpp::cli
