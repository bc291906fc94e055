#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/bn.h>

#include "pgpp/rng.hpp"

namespace pgpp {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::initializer_list<std::span<const std::uint8_t>> parts);
Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

std::span<const std::uint8_t> as_bytes(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> data);
// Throws Error(parse) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

// Source of random bytes for token nonces and blinding factors.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

// OpenSSL's CSPRNG.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Reproducible byte stream for simulations and statistical tests. Not for
// production key material.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : rng_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  Rng rng_;
};

struct BignumDeleter {
  void operator()(BIGNUM* bn) const { BN_clear_free(bn); }
};
using Bignum = std::unique_ptr<BIGNUM, BignumDeleter>;

Bignum make_bignum();
Bignum bignum_from_bytes(std::span<const std::uint8_t> big_endian);
Bignum bignum_copy(const BIGNUM* bn);
// Big-endian, left-padded with zeros to `width` bytes.
Bytes bignum_to_bytes(const BIGNUM* bn, std::size_t width);
Bytes bignum_to_bytes(const BIGNUM* bn);

// Per-thread scratch context for BIGNUM arithmetic.
BN_CTX* thread_bn_ctx();

}  // namespace pgpp
