#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgpp/tokens.hpp"

namespace pgpp::tokens {

// Client-side token store for one billing period.
struct Wallet {
  std::string period_id;
  std::vector<SignedToken> tokens;

  // First token for the slice, if any.
  std::optional<SignedToken> find(std::uint64_t slice_index) const;
};

// {"version":1,"period_id":..,"tokens":[{"m":hex(64 bytes),"signature":hex}]}
nlohmann::json wallet_to_json(const Wallet& wallet);
Wallet wallet_from_json(const nlohmann::json& doc);

// Compact form: "PGW1", u16 period length, period bytes, u32 count, then per
// token the 64-byte m, u16 signature length and the signature.
Bytes wallet_to_binary(const Wallet& wallet);
Wallet wallet_from_binary(std::span<const std::uint8_t> data);

// Client state between blinding and receiving signatures.
struct PendingIssue {
  std::string period_id;
  std::vector<Token> tokens;
  std::vector<BlindedToken> blinded;
};

// Generates one token per slice and blinds each with its slice key.
PendingIssue prepare_issue(const PublicKeySet& keys, RandomSource& random);

// Unblinds the signer's responses and checks every signature. Throws
// Error(crypto) if any signature fails to verify.
Wallet finalize_issue(const PendingIssue& pending, std::span<const Bytes> blinded_signatures,
                      const PublicKeySet& keys);

nlohmann::json pending_to_json(const PendingIssue& pending);
PendingIssue pending_from_json(const nlohmann::json& doc);

}  // namespace pgpp::tokens
