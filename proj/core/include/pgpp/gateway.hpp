#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgpp/spend.hpp"
#include "pgpp/spent_store.hpp"
#include "pgpp/tokens.hpp"
#include "pgpp/wire.hpp"

namespace pgpp::gw {

// Maps wall-clock seconds onto billing-period slices.
struct SliceClock {
  std::int64_t period_start = 0;
  std::int64_t slice_seconds = 3600;

  // Slice containing `now`; times before the period map to slice 0.
  std::uint64_t slice_at(std::int64_t now) const;
  std::int64_t slice_start(std::uint64_t slice) const;
  std::int64_t slice_end(std::uint64_t slice) const;
};

struct SessionEntry {
  std::string client_address;
  // Exclusive end of authorization, unix seconds.
  std::int64_t authorized_until = 0;
  std::optional<tokens::SignedToken> staged_next;
};

struct AuthResult {
  bool authorized = false;
  std::int64_t until = 0;
  DenyReason reason = DenyReason::malformed;

  bool retryable() const { return !authorized && is_retryable(reason); }
};

struct StageResult {
  bool staged = false;
  std::uint64_t slice_index = 0;
  DenyReason reason = DenyReason::malformed;
};

enum class Decision { forward, drop };

// Append-only JSONL record of gateway decisions:
//   {"ts":..,"address":..,"event":..,"reason":..[,"slice":..]}
class DecisionLog {
 public:
  virtual ~DecisionLog() = default;
  virtual void record(const nlohmann::json& line) = 0;
};

class StreamDecisionLog final : public DecisionLog {
 public:
  explicit StreamDecisionLog(std::ostream& out) : out_(out) {}
  void record(const nlohmann::json& line) override;

 private:
  std::mutex mutex_;
  std::ostream& out_;
};

class MemoryDecisionLog final : public DecisionLog {
 public:
  void record(const nlohmann::json& line) override;
  std::vector<nlohmann::json> lines() const;

 private:
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> lines_;
};

struct GatewayOptions {
  tokens::SliceWindow window;
  // Log every forward/drop decision, not only authentication events.
  bool log_forwarding = false;
};

// Token-gated forwarding. The gateway learns only a client address and
// whether it holds a valid token for the current slice.
class Gateway {
 public:
  Gateway(const tokens::PublicKeySet& keys, tokens::SpentTokenStore& store, SliceClock clock,
          GatewayOptions options = {}, DecisionLog* log = nullptr);

  // Spends the token for `address`; on acceptance the session is created or
  // extended to the end of the token's slice.
  AuthResult authenticate(const std::string& address, const tokens::SignedToken& token, std::int64_t now);

  // Holds a valid token for the next slice on an active session; it is spent
  // when the current authorization runs out. Re-staging replaces the token.
  StageResult stage(const std::string& address, const tokens::SignedToken& token, std::int64_t now);

  // Forward iff an unexpired session covers the address. An expired session
  // with a staged token is rolled over first.
  Decision forwarding_decision(const std::string& address, std::int64_t now);

  // Rolls over every expired session that has a staged token.
  void rollover(std::int64_t now);

  std::optional<SessionEntry> session(const std::string& address) const;
  std::size_t session_count() const;

  // Entire persistent state: sessions and spent-token digests.
  nlohmann::json state_snapshot() const;

  const SliceClock& clock() const { return clock_; }

 private:
  std::mutex& address_mutex(const std::string& address);
  bool promote_staged(const std::string& address, std::int64_t now);
  void log(std::int64_t now, const std::string& address, std::string_view event, std::string_view reason,
           std::optional<std::uint64_t> slice = std::nullopt);

  const tokens::PublicKeySet& keys_;
  tokens::SpentTokenStore& store_;
  SliceClock clock_;
  GatewayOptions options_;
  DecisionLog* log_;

  mutable std::shared_mutex table_mutex_;
  std::unordered_map<std::string, SessionEntry> sessions_;
  std::array<std::mutex, 64> address_mutexes_;
};

// Handles one decoded request; the transport calls this per frame.
WireMessage handle_request(Gateway& gateway, const std::string& address, const WireMessage& request,
                           std::int64_t now);

struct AuditViolation {
  std::size_t line = 0;
  std::string message;
};

// Replays a decision log: every forward must follow an accepted token for the
// same address and slice, and every accepted token must be in the store.
std::vector<AuditViolation> audit_decision_log(std::span<const nlohmann::json> lines, const SliceClock& clock,
                                               const tokens::SpentTokenStore& store,
                                               const std::string& period_id);

}  // namespace pgpp::gw
