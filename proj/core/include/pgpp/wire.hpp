#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "pgpp/crypto.hpp"
#include "pgpp/tokens.hpp"

namespace pgpp::gw {

// Client <-> gateway messages. Each frame is a u32 big-endian payload length
// followed by the payload: [version][type][body].
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 64 * 1024;

enum class MessageType : std::uint8_t {
  auth = 1,
  auth_ok = 2,
  auth_fail = 3,
  stage = 4,
  stage_ok = 5,
};

enum class DenyReason : std::uint8_t {
  bad_signature = 1,
  wrong_slice = 2,
  double_spend = 3,
  store_unavailable = 4,
  malformed = 5,
};

std::string_view to_string(DenyReason reason);
bool is_retryable(DenyReason reason);

// body: m (64) | u16 signature length | signature
struct AuthRequest {
  tokens::SignedToken token;
  friend bool operator==(const AuthRequest&, const AuthRequest&) = default;
};
// body: i64 authorized-until (unix seconds)
struct AuthOk {
  std::int64_t until = 0;
  friend bool operator==(const AuthOk&, const AuthOk&) = default;
};
// body: u8 reason | u8 retryable
struct AuthFail {
  DenyReason reason = DenyReason::malformed;
  bool retryable = false;
  friend bool operator==(const AuthFail&, const AuthFail&) = default;
};
// body: same as AuthRequest
struct StageRequest {
  tokens::SignedToken token;
  friend bool operator==(const StageRequest&, const StageRequest&) = default;
};
// body: u64 staged slice index
struct StageOk {
  std::uint64_t slice_index = 0;
  friend bool operator==(const StageOk&, const StageOk&) = default;
};

using WireMessage = std::variant<AuthRequest, AuthOk, AuthFail, StageRequest, StageOk>;

Bytes encode_payload(const WireMessage& message);
// Throws Error(protocol) for unknown versions or types and truncated bodies.
WireMessage decode_payload(std::span<const std::uint8_t> payload);

// Length prefix + payload.
Bytes encode_frame(const WireMessage& message);

}  // namespace pgpp::gw
