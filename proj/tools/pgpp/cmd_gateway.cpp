#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "commands.hpp"
#include "pgpp/error.hpp"
#include "pgpp/gateway.hpp"
#include "pgpp/kv_config.hpp"
#include "pgpp/spent_store.hpp"
#include "pgpp/tls.hpp"

namespace pgpp::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct ServeArgs {
  std::string config;
  std::string keys = "keys/public.json";
  std::string store = "spent.db";
  std::string bind = "127.0.0.1";
  std::uint16_t port = 4433;
  std::string log;
  std::uint64_t grace = 0;
  std::string cert;
  std::string key;
  ClockOptions clock;
};

// Values from --config fill in whatever was not given on the command line.
void apply_config(ServeArgs& a, const CLI::App& cmd) {
  if (a.config.empty()) return;
  const KvConfig kv = KvConfig::load(a.config);
  const std::vector<std::string> known = {"keys", "store", "bind", "port", "log", "grace",
                                          "certificate", "private_key", "period_start", "slice_seconds"};
  if (const auto unknown = kv.unknown_keys(known); !unknown.empty()) {
    throw Error(ErrorCode::config, "unknown gateway config key '" + unknown.front() + "'");
  }
  const auto unset = [&](const char* flag) { return cmd.count(flag) == 0; };
  if (unset("--keys")) a.keys = kv.get_string("keys", a.keys);
  if (unset("--store")) a.store = kv.get_string("store", a.store);
  if (unset("--bind")) a.bind = kv.get_string("bind", a.bind);
  if (unset("--port")) a.port = static_cast<std::uint16_t>(kv.get_int("port", a.port));
  if (unset("--log")) a.log = kv.get_string("log", a.log);
  if (unset("--grace")) a.grace = static_cast<std::uint64_t>(kv.get_int("grace", static_cast<std::int64_t>(a.grace)));
  if (unset("--cert")) a.cert = kv.get_string("certificate", a.cert);
  if (unset("--key")) a.key = kv.get_string("private_key", a.key);
  if (unset("--period-start")) a.clock.period_start = kv.get_int("period_start", a.clock.period_start);
  if (unset("--slice-seconds")) a.clock.slice_seconds = kv.get_int("slice_seconds", a.clock.slice_seconds);
}

std::unique_ptr<tokens::SpentTokenStore> open_store(const std::string& spec) {
  if (spec == ":memory:") return std::make_unique<tokens::InMemorySpentStore>();
  return std::make_unique<tokens::SqliteSpentStore>(spec);
}

void serve(const ServeArgs& a) {
  const tokens::PublicKeySet keys = tokens::public_keys_from_json(read_json(a.keys));
  const auto store = open_store(a.store);
  std::ofstream log_file;
  std::unique_ptr<gw::StreamDecisionLog> log;
  if (!a.log.empty()) {
    log_file.open(a.log, std::ios::app);
    if (!log_file) throw Error(ErrorCode::config, "cannot open decision log " + a.log);
    log = std::make_unique<gw::StreamDecisionLog>(log_file);
  }
  const gw::SliceClock clock = a.clock.resolve(unix_now());
  gw::GatewayOptions options;
  options.window.grace = a.grace;
  gw::Gateway gateway(keys, *store, clock, options, log.get());

  gw::TlsServerOptions tls;
  tls.bind_address = a.bind;
  tls.port = a.port;
  tls.certificate_file = a.cert;
  tls.private_key_file = a.key;
  gw::TlsServer server(tls, [&gateway](gw::TlsStream& stream) {
    while (const auto frame = stream.read_frame()) {
      gw::WireMessage reply;
      try {
        reply = gw::handle_request(gateway, stream.peer_address(), gw::decode_payload(*frame), unix_now());
      } catch (const Error&) {
        reply = gw::AuthFail{gw::DenyReason::malformed, false};
      }
      stream.write_frame(gw::encode_payload(reply));
    }
  });
  server.start();
  std::cout << "listening on " << a.bind << ':' << server.port() << "\nperiod " << keys.period_id << ", "
            << keys.slice_count() << " slices from " << clock.period_start << "\ncertificate sha256 "
            << server.certificate_fingerprint() << std::endl;

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::seconds(1));
    gateway.rollover(unix_now());
  }
  server.stop();
  std::cout << "stopped; " << gateway.session_count() << " sessions\n";
}

struct AuditArgs {
  std::string log = "decisions.jsonl";
  std::string store = "spent.db";
  std::string keys = "keys/public.json";
  ClockOptions clock;
};

int audit(const AuditArgs& a) {
  const tokens::PublicKeySet keys = tokens::public_keys_from_json(read_json(a.keys));
  const auto store = open_store(a.store);
  std::vector<nlohmann::json> lines;
  std::istringstream in(read_text(a.log));
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    try {
      lines.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error&) {
      lines.push_back(nullptr);
    }
  }
  const auto violations = gw::audit_decision_log(lines, a.clock.resolve(unix_now()), *store, keys.period_id);
  for (const auto& v : violations) std::cout << "line " << v.line << ": " << v.message << '\n';
  std::cout << lines.size() << " log lines, " << violations.size() << " violations\n";
  return violations.empty() ? kExitOk : kExitFailure;
}

}  // namespace

void register_gateway_commands(CLI::App& app, int& exit_code) {
  CLI::App* gateway = app.add_subcommand("gateway", "Token-gated gateway service");
  gateway->require_subcommand(1);

  auto s = std::make_shared<ServeArgs>();
  CLI::App* serve_cmd = gateway->add_subcommand("serve", "Accept tokens over TLS and gate forwarding");
  serve_cmd->add_option("--config", s->config, "key = value file (keys, store, bind, port, log, grace, ...)");
  serve_cmd->add_option("--keys", s->keys, "Published public keys");
  serve_cmd->add_option("--store", s->store, "SQLite spent-token database, or :memory:");
  serve_cmd->add_option("--bind", s->bind, "Listen address");
  serve_cmd->add_option("--port", s->port, "Listen port (0 = ephemeral)");
  serve_cmd->add_option("--log", s->log, "Append JSONL decisions here");
  serve_cmd->add_option("--grace", s->grace, "Also accept tokens this many slices old");
  serve_cmd->add_option("--cert", s->cert, "PEM certificate (default: self-signed)");
  serve_cmd->add_option("--key", s->key, "PEM private key for --cert");
  s->clock.add_to(*serve_cmd);
  serve_cmd->callback([s, serve_cmd] {
    apply_config(*s, *serve_cmd);
    serve(*s);
  });

  auto a = std::make_shared<AuditArgs>();
  CLI::App* audit_cmd = gateway->add_subcommand("audit", "Replay a decision log against the spent store");
  audit_cmd->add_option("--log", a->log, "Decision log");
  audit_cmd->add_option("--store", a->store, "Spent-token database");
  audit_cmd->add_option("--keys", a->keys, "Published public keys");
  a->clock.add_to(*audit_cmd);
  audit_cmd->callback([a, &exit_code] { exit_code = audit(*a); });
}

}  // namespace pgpp::cli
