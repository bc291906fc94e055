#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgpp/crypto.hpp"

namespace pgpp::tokens {

inline constexpr std::size_t kMessageBytes = 64;
inline constexpr std::size_t kNonceBytes = 32;
inline constexpr int kDefaultModulusBits = 2048;

using Message = std::array<std::uint8_t, kMessageBytes>;
using Nonce = std::array<std::uint8_t, kNonceBytes>;

enum class TokenKind : std::uint8_t {
  time_slice = 0,
  // Each token denominates a unit of data instead of a unit of time.
  metered = 1,
};

// One unit of access: m = i || r.
//
// Byte layout of m (64 bytes):
//   [0]      kind tag (0 for plain time-slice tokens)
//   [1]      flags, bit 0 = priority
//   [2..23]  zero
//   [24..31] slice index, big-endian
//   [32..63] nonce r
// With the default kind and no flags, bytes 0..31 are exactly the 256-bit
// big-endian slice index.
struct Token {
  std::uint64_t slice_index = 0;
  Nonce nonce{};
  TokenKind kind = TokenKind::time_slice;
  bool priority = false;

  Message message() const;
  // Throws Error(parse) for unknown tags or non-zero reserved bytes.
  static Token from_message(std::span<const std::uint8_t> m);
  static Token generate(std::uint64_t slice_index, RandomSource& random);

  friend bool operator==(const Token&, const Token&) = default;
};

// RSA verification key for one slice.
class RsaPublicKey {
 public:
  RsaPublicKey(std::span<const std::uint8_t> modulus, std::span<const std::uint8_t> exponent);
  ~RsaPublicKey();
  RsaPublicKey(RsaPublicKey&&) noexcept;
  RsaPublicKey& operator=(RsaPublicKey&&) noexcept;
  RsaPublicKey(const RsaPublicKey&) = delete;
  RsaPublicKey& operator=(const RsaPublicKey&) = delete;

  const BIGNUM* modulus() const;
  const BIGNUM* exponent() const;
  std::size_t modulus_bytes() const;
  int modulus_bits() const;

  Bytes modulus_be() const;
  Bytes exponent_be() const;

  // base^e mod n.
  Bignum apply(const BIGNUM* base) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// RSA signing key for one slice; signs raw residues (no padding) with CRT.
class RsaPrivateKey {
 public:
  static RsaPrivateKey generate(int modulus_bits = kDefaultModulusBits);
  static RsaPrivateKey from_pem(std::string_view pem);

  ~RsaPrivateKey();
  RsaPrivateKey(RsaPrivateKey&&) noexcept;
  RsaPrivateKey& operator=(RsaPrivateKey&&) noexcept;
  RsaPrivateKey(const RsaPrivateKey&) = delete;
  RsaPrivateKey& operator=(const RsaPrivateKey&) = delete;

  std::string to_pem() const;
  RsaPublicKey public_key() const;
  std::size_t modulus_bytes() const;

  // value^d mod n. `value` must be modulus_bytes() long and < n.
  Bytes sign_raw(std::span<const std::uint8_t> value) const;

 private:
  struct Impl;
  explicit RsaPrivateKey(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// Published verification keys of one billing period.
struct PublicKeySet {
  std::string period_id;
  std::vector<RsaPublicKey> keys;

  std::size_t slice_count() const { return keys.size(); }
  const RsaPublicKey& key(std::uint64_t slice_index) const;
};

// The billing authority's per-period keys: one independent keypair per slice.
struct SliceKeySet {
  PublicKeySet public_part;
  std::vector<RsaPrivateKey> signing_keys;

  std::size_t slice_count() const { return signing_keys.size(); }
};

// Generates `slices` independent keypairs. Key generation fans out over
// `threads` workers (0 = hardware concurrency).
SliceKeySet gen_period_keys(std::string period_id, std::size_t slices,
                            int modulus_bits = kDefaultModulusBits, unsigned threads = 0);

inline constexpr int kRepositoryFormatVersion = 1;

// Public repository record:
//   {"version":1,"period_id":..,"s":..,"keys":[{"slice_index":i,"modulus":hex,"exponent":hex}]}
nlohmann::json public_keys_to_json(const PublicKeySet& keys);
PublicKeySet public_keys_from_json(const nlohmann::json& doc);

// Billing authority's private file: PEM per slice.
nlohmann::json private_keys_to_json(const SliceKeySet& keys);
SliceKeySet private_keys_from_json(const nlohmann::json& doc);

// Full-domain hash of m onto Z_n: SHA-256 in counter mode expanded to
// modulus length plus 16 bytes, reduced mod n.
Bignum full_domain_hash(std::span<const std::uint8_t> message, const RsaPublicKey& key);

struct BlindedToken {
  // FDH(m) * b^e mod n, modulus-width big-endian. Sent to the signer.
  Bytes blinded_message;
  // b^-1 mod n. Never leaves the client.
  Bytes unblinding_secret;
};

// Chaum blinding with a fresh random unit b.
BlindedToken blind(const Token& token, const RsaPublicKey& key, RandomSource& random);

// Signs a blinded value with one slice key. Throws Error(domain) if the value
// is not below the modulus.
Bytes sign_blinded(std::span<const std::uint8_t> blinded_message, const RsaPrivateKey& key);

// Batch form of sign_blinded; request k is signed with the key of slice k.
std::vector<Bytes> sign_blinded_batch(std::span<const Bytes> blinded_messages, const SliceKeySet& keys);

Bytes unblind(std::span<const std::uint8_t> blinded_signature, std::span<const std::uint8_t> unblinding_secret,
              const RsaPublicKey& key);

struct SignedToken {
  Token token;
  Bytes signature;

  friend bool operator==(const SignedToken&, const SignedToken&) = default;
};

// sig^e == FDH(m) mod n.
bool verify_signature(const SignedToken& signed_token, const RsaPublicKey& key);

}  // namespace pgpp::tokens
