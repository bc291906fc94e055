#pragma once

#include <cstdint>
#include <string_view>

#include "pgpp/spent_store.hpp"
#include "pgpp/tokens.hpp"

namespace pgpp::tokens {

enum class Verdict { accepted, bad_signature, wrong_slice, double_spend };

std::string_view to_string(Verdict verdict);

struct SliceWindow {
  // Slices before the current one still accepted (clock-skew grace).
  std::uint64_t grace = 0;
};

// Accepts iff the signature verifies under the slice key, the slice lies in
// [current - grace, current], and the token was not spent before. Checks run
// in that order so invalid tokens never reach the store. Throws
// StoreUnavailable if the store cannot be reached.
Verdict verify_and_spend(const SignedToken& signed_token, const PublicKeySet& keys, SpentTokenStore& store,
                         std::uint64_t current_slice, SliceWindow window = {});

SpentKey spent_key_for(const SignedToken& signed_token, std::string_view period_id);

}  // namespace pgpp::tokens
