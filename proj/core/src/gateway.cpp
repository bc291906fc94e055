#include "pgpp/gateway.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "pgpp/error.hpp"

namespace pgpp::gw {

std::uint64_t SliceClock::slice_at(std::int64_t now) const {
  if (slice_seconds <= 0) throw Error(ErrorCode::invalid_argument, "slice_seconds must be positive");
  if (now < period_start) return 0;
  return static_cast<std::uint64_t>((now - period_start) / slice_seconds);
}

std::int64_t SliceClock::slice_start(std::uint64_t slice) const {
  return period_start + static_cast<std::int64_t>(slice) * slice_seconds;
}

std::int64_t SliceClock::slice_end(std::uint64_t slice) const { return slice_start(slice + 1); }

void StreamDecisionLog::record(const nlohmann::json& line) {
  std::lock_guard lock(mutex_);
  out_ << line.dump() << '\n';
  out_.flush();
}

void MemoryDecisionLog::record(const nlohmann::json& line) {
  std::lock_guard lock(mutex_);
  lines_.push_back(line);
}

std::vector<nlohmann::json> MemoryDecisionLog::lines() const {
  std::lock_guard lock(mutex_);
  return lines_;
}

namespace {

DenyReason deny_for(tokens::Verdict verdict) {
  switch (verdict) {
    case tokens::Verdict::bad_signature: return DenyReason::bad_signature;
    case tokens::Verdict::wrong_slice: return DenyReason::wrong_slice;
    case tokens::Verdict::double_spend: return DenyReason::double_spend;
    case tokens::Verdict::accepted: break;
  }
  return DenyReason::malformed;
}

}  // namespace

Gateway::Gateway(const tokens::PublicKeySet& keys, tokens::SpentTokenStore& store, SliceClock clock,
                 GatewayOptions options, DecisionLog* log)
    : keys_(keys), store_(store), clock_(clock), options_(options), log_(log) {}

std::mutex& Gateway::address_mutex(const std::string& address) {
  return address_mutexes_[std::hash<std::string>{}(address) % address_mutexes_.size()];
}

void Gateway::log(std::int64_t now, const std::string& address, std::string_view event, std::string_view reason,
                  std::optional<std::uint64_t> slice) {
  if (log_ == nullptr) return;
  nlohmann::json line = {{"ts", now}, {"address", address}, {"event", event}, {"reason", reason}};
  if (slice) line["slice"] = *slice;
  log_->record(line);
}

AuthResult Gateway::authenticate(const std::string& address, const tokens::SignedToken& token, std::int64_t now) {
  std::lock_guard address_lock(address_mutex(address));
  const std::uint64_t current = clock_.slice_at(now);
  tokens::Verdict verdict{};
  try {
    verdict = tokens::verify_and_spend(token, keys_, store_, current, options_.window);
  } catch (const tokens::StoreUnavailable&) {
    log(now, address, "auth_deny", to_string(DenyReason::store_unavailable));
    return AuthResult{false, 0, DenyReason::store_unavailable};
  }
  if (verdict != tokens::Verdict::accepted) {
    const DenyReason reason = deny_for(verdict);
    log(now, address, "auth_deny", to_string(reason));
    return AuthResult{false, 0, reason};
  }
  const std::uint64_t slice = token.token.slice_index;
  std::int64_t until = clock_.slice_end(slice);
  {
    std::unique_lock table_lock(table_mutex_);
    SessionEntry& entry = sessions_[address];
    entry.client_address = address;
    entry.authorized_until = std::max(entry.authorized_until, until);
    until = entry.authorized_until;
  }
  log(now, address, "auth_accept", "ok", slice);
  return AuthResult{true, until, DenyReason::malformed};
}

StageResult Gateway::stage(const std::string& address, const tokens::SignedToken& token, std::int64_t now) {
  std::lock_guard address_lock(address_mutex(address));
  const std::uint64_t slice = token.token.slice_index;
  const auto deny = [&](DenyReason reason) {
    log(now, address, "stage_deny", to_string(reason));
    return StageResult{false, slice, reason};
  };
  if (slice >= keys_.slice_count() || slice != clock_.slice_at(now) + 1) return deny(DenyReason::wrong_slice);
  {
    std::shared_lock table_lock(table_mutex_);
    const auto it = sessions_.find(address);
    if (it == sessions_.end() || it->second.authorized_until <= now) return deny(DenyReason::wrong_slice);
  }
  if (!tokens::verify_signature(token, keys_.key(slice))) return deny(DenyReason::bad_signature);
  try {
    if (store_.contains(tokens::spent_key_for(token, keys_.period_id))) return deny(DenyReason::double_spend);
  } catch (const tokens::StoreUnavailable&) {
    return deny(DenyReason::store_unavailable);
  }
  {
    std::unique_lock table_lock(table_mutex_);
    SessionEntry& entry = sessions_[address];
    entry.client_address = address;
    entry.staged_next = token;
  }
  log(now, address, "stage", "ok", slice);
  return StageResult{true, slice, DenyReason::malformed};
}

bool Gateway::promote_staged(const std::string& address, std::int64_t now) {
  std::lock_guard address_lock(address_mutex(address));
  std::optional<tokens::SignedToken> staged;
  {
    std::shared_lock table_lock(table_mutex_);
    const auto it = sessions_.find(address);
    if (it == sessions_.end()) return false;
    if (it->second.authorized_until > now) return true;
    staged = it->second.staged_next;
  }
  if (!staged) return false;

  tokens::Verdict verdict{};
  try {
    verdict = tokens::verify_and_spend(*staged, keys_, store_, clock_.slice_at(now), options_.window);
  } catch (const tokens::StoreUnavailable&) {
    // The staged token stays; the next lookup retries.
    log(now, address, "rollover_deny", to_string(DenyReason::store_unavailable));
    return false;
  }
  std::unique_lock table_lock(table_mutex_);
  SessionEntry& entry = sessions_[address];
  entry.staged_next.reset();
  if (verdict != tokens::Verdict::accepted) {
    table_lock.unlock();
    log(now, address, "rollover_deny", to_string(deny_for(verdict)));
    return false;
  }
  entry.authorized_until = std::max(entry.authorized_until, clock_.slice_end(staged->token.slice_index));
  table_lock.unlock();
  log(now, address, "auth_accept", "rollover", staged->token.slice_index);
  return true;
}

Decision Gateway::forwarding_decision(const std::string& address, std::int64_t now) {
  bool covered = false;
  bool has_staged = false;
  {
    std::shared_lock table_lock(table_mutex_);
    const auto it = sessions_.find(address);
    if (it != sessions_.end()) {
      covered = it->second.authorized_until > now;
      has_staged = it->second.staged_next.has_value();
    }
  }
  if (!covered && has_staged) covered = promote_staged(address, now);
  const Decision decision = covered ? Decision::forward : Decision::drop;
  if (options_.log_forwarding) {
    log(now, address, covered ? "forward" : "drop", covered ? "session" : "no-session",
        covered ? std::optional<std::uint64_t>(clock_.slice_at(now)) : std::nullopt);
  }
  return decision;
}

void Gateway::rollover(std::int64_t now) {
  std::vector<std::string> due;
  {
    std::shared_lock table_lock(table_mutex_);
    for (const auto& [address, entry] : sessions_) {
      if (entry.authorized_until <= now && entry.staged_next) due.push_back(address);
    }
  }
  for (const auto& address : due) promote_staged(address, now);
}

std::optional<SessionEntry> Gateway::session(const std::string& address) const {
  std::shared_lock table_lock(table_mutex_);
  const auto it = sessions_.find(address);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::size_t Gateway::session_count() const {
  std::shared_lock table_lock(table_mutex_);
  return sessions_.size();
}

nlohmann::json Gateway::state_snapshot() const {
  nlohmann::json sessions = nlohmann::json::array();
  {
    std::shared_lock table_lock(table_mutex_);
    std::vector<const SessionEntry*> ordered;
    for (const auto& [address, entry] : sessions_) ordered.push_back(&entry);
    std::sort(ordered.begin(), ordered.end(),
              [](const SessionEntry* a, const SessionEntry* b) { return a->client_address < b->client_address; });
    for (const SessionEntry* entry : ordered) {
      nlohmann::json row = {{"address", entry->client_address}, {"authorized_until", entry->authorized_until}};
      if (entry->staged_next) {
        row["staged_digest"] = to_hex(tokens::spent_key_for(*entry->staged_next, keys_.period_id).digest);
      }
      sessions.push_back(std::move(row));
    }
  }
  nlohmann::json spent = nlohmann::json::array();
  for (const auto& key : store_.snapshot()) {
    spent.push_back({{"period_id", key.period_id}, {"slice", key.slice_index}, {"digest", to_hex(key.digest)}});
  }
  return {{"sessions", std::move(sessions)}, {"spent", std::move(spent)}};
}

WireMessage handle_request(Gateway& gateway, const std::string& address, const WireMessage& request,
                           std::int64_t now) {
  if (const auto* auth = std::get_if<AuthRequest>(&request)) {
    const AuthResult result = gateway.authenticate(address, auth->token, now);
    if (result.authorized) return AuthOk{result.until};
    return AuthFail{result.reason, result.retryable()};
  }
  if (const auto* stage = std::get_if<StageRequest>(&request)) {
    const StageResult result = gateway.stage(address, stage->token, now);
    if (result.staged) return StageOk{result.slice_index};
    return AuthFail{result.reason, is_retryable(result.reason)};
  }
  return AuthFail{DenyReason::malformed, false};
}

std::vector<AuditViolation> audit_decision_log(std::span<const nlohmann::json> lines, const SliceClock& clock,
                                               const tokens::SpentTokenStore& store,
                                               const std::string& period_id) {
  std::vector<AuditViolation> out;
  std::set<std::tuple<std::string, std::uint64_t>> accepted;
  std::map<std::uint64_t, std::size_t> accepts_per_slice;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const nlohmann::json& line = lines[i];
    const std::size_t line_no = i + 1;
    if (!line.is_object() || !line.contains("event") || !line.contains("address") || !line.contains("ts")) {
      out.push_back({line_no, "malformed log line"});
      continue;
    }
    const std::string event = line["event"].get<std::string>();
    const std::string address = line["address"].get<std::string>();
    const std::int64_t ts = line["ts"].get<std::int64_t>();
    if (event == "auth_accept") {
      if (!line.contains("slice")) {
        out.push_back({line_no, "accept without slice"});
        continue;
      }
      const std::uint64_t slice = line["slice"].get<std::uint64_t>();
      accepted.emplace(address, slice);
      ++accepts_per_slice[slice];
    } else if (event == "forward") {
      const std::uint64_t slice = clock.slice_at(ts);
      if (!accepted.contains({address, slice})) {
        out.push_back({line_no, "forward for " + address + " in slice " + std::to_string(slice) +
                                    " without an accepted token"});
      }
    }
  }
  // Every accepted token was spent: the store holds at least as many digests
  // per slice as the log has acceptances.
  std::map<std::uint64_t, std::size_t> spent_per_slice;
  for (const auto& key : store.snapshot()) {
    if (key.period_id == period_id) ++spent_per_slice[key.slice_index];
  }
  for (const auto& [slice, count] : accepts_per_slice) {
    if (spent_per_slice[slice] < count) {
      out.push_back({0, "slice " + std::to_string(slice) + ": " + std::to_string(count) + " acceptances but " +
                            std::to_string(spent_per_slice[slice]) + " spent digests"});
    }
  }
  return out;
}

}  // namespace pgpp::gw
