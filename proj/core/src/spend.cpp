#include "pgpp/spend.hpp"

namespace pgpp::tokens {

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::accepted: return "accepted";
    case Verdict::bad_signature: return "bad-signature";
    case Verdict::wrong_slice: return "wrong-slice";
    case Verdict::double_spend: return "double-spend";
  }
  return "unknown";
}

SpentKey spent_key_for(const SignedToken& signed_token, std::string_view period_id) {
  const Message m = signed_token.token.message();
  return SpentKey{std::string(period_id), signed_token.token.slice_index, sha256(m)};
}

Verdict verify_and_spend(const SignedToken& signed_token, const PublicKeySet& keys, SpentTokenStore& store,
                         std::uint64_t current_slice, SliceWindow window) {
  const std::uint64_t slice = signed_token.token.slice_index;
  if (slice >= keys.slice_count()) return Verdict::wrong_slice;
  if (!verify_signature(signed_token, keys.key(slice))) return Verdict::bad_signature;
  const std::uint64_t earliest = current_slice >= window.grace ? current_slice - window.grace : 0;
  if (slice > current_slice || slice < earliest) return Verdict::wrong_slice;
  return store.insert(spent_key_for(signed_token, keys.period_id)) == InsertResult::inserted ? Verdict::accepted
                                                                                              : Verdict::double_spend;
}

}  // namespace pgpp::tokens
