#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "pgpp/gateway.hpp"
#include "pgpp/wallet.hpp"
#include "pgpp/wire.hpp"

namespace pgpp::gw {

// One request/response exchange with a gateway.
using Exchange = std::function<WireMessage(const WireMessage&)>;

// Exchange over a fresh TLS connection per request.
Exchange tls_exchange(std::string host, std::uint16_t port, std::string pinned_fingerprint = {});

enum class AgentState { offline, authorized, denied };

// Background agent on the user device: authenticates with the current
// slice's token when connectivity comes up and stages the next slice's token
// ahead of each boundary.
class Agent {
 public:
  Agent(tokens::Wallet wallet, SliceClock clock, Exchange exchange, std::int64_t stage_lead_seconds = 60);

  // Connectivity transitions. Going up triggers authentication.
  void on_connectivity(bool up, std::int64_t now);

  // Periodic tick: re-authenticates after expiry and stages the next token
  // once within the lead window of the boundary.
  void poll(std::int64_t now);

  AgentState state() const { return state_; }
  std::int64_t authorized_until() const { return authorized_until_; }
  std::optional<DenyReason> last_denial() const { return last_denial_; }
  std::optional<std::uint64_t> staged_slice() const { return staged_slice_; }

 private:
  void authenticate(std::int64_t now);
  void stage_next(std::int64_t now);

  tokens::Wallet wallet_;
  SliceClock clock_;
  Exchange exchange_;
  std::int64_t stage_lead_seconds_;
  bool online_ = false;
  AgentState state_ = AgentState::offline;
  std::int64_t authorized_until_ = 0;
  std::optional<DenyReason> last_denial_;
  std::optional<std::uint64_t> staged_slice_;
};

}  // namespace pgpp::gw
