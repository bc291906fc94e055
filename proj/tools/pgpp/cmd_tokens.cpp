#include <filesystem>
#include <iostream>
#include <thread>

#include "commands.hpp"
#include "pgpp/agent.hpp"
#include "pgpp/error.hpp"
#include "pgpp/tokens.hpp"
#include "pgpp/wallet.hpp"

namespace pgpp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

tokens::PublicKeySet load_public(const std::string& path) { return tokens::public_keys_from_json(read_json(path)); }

tokens::Wallet load_wallet(const fs::path& path) {
  if (WalletFileFormat::is_binary(path)) return tokens::wallet_from_binary(read_binary(path));
  return tokens::wallet_from_json(read_json(path));
}

void save_wallet(const fs::path& path, const tokens::Wallet& wallet) {
  if (WalletFileFormat::is_binary(path)) {
    write_binary(path, tokens::wallet_to_binary(wallet));
  } else {
    write_json(path, tokens::wallet_to_json(wallet));
  }
}

tokens::SliceKeySet load_or_generate(const fs::path& dir, const std::string& period, std::size_t slices, int bits) {
  const fs::path priv = dir / "private.json";
  if (fs::exists(priv)) {
    tokens::SliceKeySet keys = tokens::private_keys_from_json(read_json(priv));
    if (keys.public_part.period_id != period) {
      throw Error(ErrorCode::config, priv.string() + " holds keys for period '" + keys.public_part.period_id + "'");
    }
    return keys;
  }
  std::cerr << "generating " << slices << " RSA-" << bits << " keys for period " << period << '\n';
  tokens::SliceKeySet keys = tokens::gen_period_keys(period, slices, bits);
  write_json(priv, tokens::private_keys_to_json(keys));
  fs::permissions(priv, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
  write_json(dir / "public.json", tokens::public_keys_to_json(keys.public_part));
  return keys;
}

struct IssueArgs {
  std::string period;
  std::size_t slices = 24;
  int bits = tokens::kDefaultModulusBits;
  std::string keys_dir = "keys";
  std::string requests;
  std::string out = "responses.json";
};

void run_issue(const IssueArgs& a) {
  fs::create_directories(a.keys_dir);
  const tokens::SliceKeySet keys = load_or_generate(a.keys_dir, a.period, a.slices, a.bits);
  std::cout << "public keys: " << (fs::path(a.keys_dir) / "public.json").string() << '\n';
  if (a.requests.empty()) return;
  const json req = read_json(a.requests);
  if (req.at("period_id").get<std::string>() != a.period) throw Error(ErrorCode::config, "request is for another period");
  std::vector<Bytes> blinded;
  for (const auto& h : req.at("blinded")) blinded.push_back(from_hex(h.get<std::string>()));
  if (blinded.size() != keys.slice_count()) {
    throw Error(ErrorCode::config, "expected " + std::to_string(keys.slice_count()) + " blinded tokens, got " +
                                       std::to_string(blinded.size()));
  }
  json sigs = json::array();
  for (const Bytes& s : tokens::sign_blinded_batch(blinded, keys)) sigs.push_back(to_hex(s));
  write_json(a.out, {{"period_id", a.period}, {"signatures", std::move(sigs)}});
  std::cout << "signed " << blinded.size() << " tokens -> " << a.out << '\n';
}

struct ClientArgs {
  std::string keys = "keys/public.json";
  std::string pending = "pending.json";
  std::string requests = "requests.json";
  std::string responses = "responses.json";
  std::string wallet = "wallet.json";
  std::string host = "127.0.0.1";
  std::uint16_t port = 4433;
  std::string pin;
  std::int64_t watch_seconds = 0;
  ClockOptions clock;
};

void run_request(const ClientArgs& a) {
  const tokens::PublicKeySet keys = load_public(a.keys);
  SystemRandom random;
  const tokens::PendingIssue pending = tokens::prepare_issue(keys, random);
  write_json(a.pending, tokens::pending_to_json(pending));
  json blinded = json::array();
  for (const auto& b : pending.blinded) blinded.push_back(to_hex(b.blinded_message));
  write_json(a.requests, {{"period_id", keys.period_id}, {"blinded", std::move(blinded)}});
  std::cout << pending.tokens.size() << " blinded tokens -> " << a.requests << '\n';
}

void run_finalize(const ClientArgs& a) {
  const tokens::PublicKeySet keys = load_public(a.keys);
  const tokens::PendingIssue pending = tokens::pending_from_json(read_json(a.pending));
  const json resp = read_json(a.responses);
  std::vector<Bytes> sigs;
  for (const auto& h : resp.at("signatures")) sigs.push_back(from_hex(h.get<std::string>()));
  const tokens::Wallet wallet = tokens::finalize_issue(pending, sigs, keys);
  save_wallet(a.wallet, wallet);
  std::cout << wallet.tokens.size() << " tokens -> " << a.wallet << '\n';
}

std::string_view state_name(gw::AgentState s) {
  switch (s) {
    case gw::AgentState::offline: return "offline";
    case gw::AgentState::authorized: return "authorized";
    case gw::AgentState::denied: return "denied";
  }
  return "?";
}

int run_authenticate(const ClientArgs& a) {
  const std::int64_t now = unix_now();
  gw::Agent agent(load_wallet(a.wallet), a.clock.resolve(now), gw::tls_exchange(a.host, a.port, a.pin));
  agent.on_connectivity(true, now);
  const auto report = [&] {
    std::cout << state_name(agent.state());
    if (agent.state() == gw::AgentState::authorized) std::cout << " until " << agent.authorized_until();
    if (agent.last_denial()) std::cout << " (" << gw::to_string(*agent.last_denial()) << ")";
    std::cout << '\n';
  };
  report();
  for (std::int64_t waited = 0; waited < a.watch_seconds; ++waited) {
    std::this_thread::sleep_for(std::chrono::seconds(1));
    const auto before = agent.state();
    agent.poll(unix_now());
    if (agent.state() != before) report();
  }
  return agent.state() == gw::AgentState::authorized ? kExitOk : kExitFailure;
}

}  // namespace

void register_token_commands(CLI::App& app, int& exit_code) {
  auto issue = std::make_shared<IssueArgs>();
  CLI::App* billing = app.add_subcommand("billing", "Billing authority operations");
  billing->require_subcommand(1);
  CLI::App* issue_cmd = billing->add_subcommand("issue", "Create period keys and sign blinded token requests");
  issue_cmd->add_option("--period", issue->period, "Billing period id")->required();
  issue_cmd->add_option("--slices", issue->slices, "Time slices per period")->check(CLI::PositiveNumber);
  issue_cmd->add_option("--bits", issue->bits, "RSA modulus size");
  issue_cmd->add_option("--keys-dir", issue->keys_dir, "Where public.json and private.json live");
  issue_cmd->add_option("--requests", issue->requests, "Blinded requests from `client request`");
  issue_cmd->add_option("--out", issue->out, "Signed responses");
  issue_cmd->callback([issue] { run_issue(*issue); });

  auto client = std::make_shared<ClientArgs>();
  CLI::App* client_cmd = app.add_subcommand("client", "User-side token wallet and gateway agent");
  client_cmd->require_subcommand(1);
  CLI::App* request = client_cmd->add_subcommand("request", "Blind one fresh token per slice");
  request->add_option("--keys", client->keys, "Published public keys");
  request->add_option("--pending", client->pending, "Client-private blinding state");
  request->add_option("--requests", client->requests, "File to hand to the billing authority");
  request->callback([client] { run_request(*client); });

  CLI::App* finalize = client_cmd->add_subcommand("finalize", "Unblind signatures into a wallet");
  finalize->add_option("--keys", client->keys, "Published public keys");
  finalize->add_option("--pending", client->pending, "Blinding state from `client request`");
  finalize->add_option("--responses", client->responses, "Signatures from the billing authority");
  finalize->add_option("--wallet", client->wallet, "Wallet file (.bin for binary)");
  finalize->callback([client] { run_finalize(*client); });

  CLI::App* auth = client_cmd->add_subcommand("authenticate", "Present the current slice's token to a gateway");
  auth->add_option("--wallet", client->wallet, "Wallet file")->required();
  auth->add_option("--host", client->host, "Gateway host");
  auth->add_option("--port", client->port, "Gateway port");
  auth->add_option("--pin", client->pin, "Expected SHA-256 fingerprint of the gateway certificate");
  auth->add_option("--watch", client->watch_seconds, "Keep running and re-authenticate for this many seconds");
  client->clock.add_to(*auth);
  auth->callback([client, &exit_code] { exit_code = run_authenticate(*client); });

  auto verify_keys = std::make_shared<std::string>("keys/public.json");
  auto verify_wallet = std::make_shared<std::string>("wallet.json");
  CLI::App* tokens_cmd = app.add_subcommand("tokens", "Inspect token wallets");
  tokens_cmd->require_subcommand(1);
  CLI::App* verify = tokens_cmd->add_subcommand("verify", "Check every signature in a wallet");
  verify->add_option("--keys", *verify_keys, "Published public keys");
  verify->add_option("--wallet", *verify_wallet, "Wallet file");
  verify->callback([=, &exit_code] {
    const tokens::PublicKeySet keys = load_public(*verify_keys);
    const tokens::Wallet wallet = load_wallet(*verify_wallet);
    std::size_t ok = 0;
    for (const auto& t : wallet.tokens) {
      if (t.token.slice_index < keys.slice_count() && tokens::verify_signature(t, keys.key(t.token.slice_index))) ++ok;
    }
    std::cout << ok << "/" << wallet.tokens.size() << " tokens verify; binary size "
              << tokens::wallet_to_binary(wallet).size() << " bytes\n";
    if (ok != wallet.tokens.size()) exit_code = kExitFailure;
  });
}

}  // namespace pgpp::cli
