#include "pgpp/agent.hpp"

#include "pgpp/error.hpp"
#include "pgpp/tls.hpp"

namespace pgpp::gw {

Exchange tls_exchange(std::string host, std::uint16_t port, std::string pinned_fingerprint) {
  return [host = std::move(host), port, pin = std::move(pinned_fingerprint)](const WireMessage& request) {
    TlsStream stream = tls_connect(host, port, pin);
    stream.write_frame(encode_payload(request));
    const std::optional<Bytes> reply = stream.read_frame();
    if (!reply) throw Error(ErrorCode::io, "gateway closed the connection");
    return decode_payload(*reply);
  };
}

Agent::Agent(tokens::Wallet wallet, SliceClock clock, Exchange exchange, std::int64_t stage_lead_seconds)
    : wallet_(std::move(wallet)), clock_(clock), exchange_(std::move(exchange)), stage_lead_seconds_(stage_lead_seconds) {}

void Agent::on_connectivity(bool up, std::int64_t now) {
  online_ = up;
  if (!up) {
    state_ = AgentState::offline;
    return;
  }
  authenticate(now);
}

void Agent::poll(std::int64_t now) {
  if (!online_) return;
  if (now >= authorized_until_) {
    // A staged token is spent by the gateway at the boundary.
    if (staged_slice_ && *staged_slice_ == clock_.slice_at(now)) {
      authorized_until_ = clock_.slice_end(*staged_slice_);
      staged_slice_.reset();
      state_ = AgentState::authorized;
    } else {
      authenticate(now);
    }
  }
  if (state_ == AgentState::authorized && authorized_until_ - now <= stage_lead_seconds_) stage_next(now);
}

void Agent::authenticate(std::int64_t now) {
  const std::uint64_t slice = clock_.slice_at(now);
  const std::optional<tokens::SignedToken> token = wallet_.find(slice);
  if (!token) {
    state_ = AgentState::denied;
    last_denial_ = DenyReason::wrong_slice;
    return;
  }
  const WireMessage reply = exchange_(AuthRequest{*token});
  if (const auto* ok = std::get_if<AuthOk>(&reply)) {
    state_ = AgentState::authorized;
    authorized_until_ = ok->until;
    last_denial_.reset();
  } else if (const auto* fail = std::get_if<AuthFail>(&reply)) {
    state_ = AgentState::denied;
    last_denial_ = fail->reason;
  } else {
    throw Error(ErrorCode::protocol, "unexpected reply to AUTH");
  }
}

void Agent::stage_next(std::int64_t now) {
  const std::uint64_t next = clock_.slice_at(authorized_until_);
  if (staged_slice_ == next) return;
  const std::optional<tokens::SignedToken> token = wallet_.find(next);
  if (!token) return;
  const WireMessage reply = exchange_(StageRequest{*token});
  if (const auto* ok = std::get_if<StageOk>(&reply)) {
    staged_slice_ = ok->slice_index;
  } else if (const auto* fail = std::get_if<AuthFail>(&reply)) {
    last_denial_ = fail->reason;
  } else {
    throw Error(ErrorCode::protocol, "unexpected reply to STAGE");
  }
  (void)now;
}

}  // namespace pgpp::gw
