#include "pgpp/tokens.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include <openssl/bio.h>
#include <openssl/core_names.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>

#include "pgpp/error.hpp"

namespace pgpp::tokens {
namespace {

[[noreturn]] void crypto_fail(const std::string& what) {
  const unsigned long code = ERR_get_error();
  char buf[256] = {0};
  if (code != 0) ERR_error_string_n(code, buf, sizeof(buf));
  throw Error(ErrorCode::crypto, what + (code != 0 ? std::string(": ") + buf : std::string()));
}

struct PkeyDeleter {
  void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};
using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

Bignum pkey_param(const EVP_PKEY* key, const char* name) {
  BIGNUM* bn = nullptr;
  if (EVP_PKEY_get_bn_param(key, name, &bn) != 1) crypto_fail(std::string("missing RSA parameter ") + name);
  return Bignum(bn);
}

}  // namespace

Message Token::message() const {
  Message m{};
  m[0] = static_cast<std::uint8_t>(kind);
  m[1] = priority ? 0x01 : 0x00;
  for (int b = 0; b < 8; ++b) m[24 + b] = static_cast<std::uint8_t>(slice_index >> (8 * (7 - b)));
  std::copy(nonce.begin(), nonce.end(), m.begin() + 32);
  return m;
}

Token Token::from_message(std::span<const std::uint8_t> m) {
  if (m.size() != kMessageBytes) throw Error(ErrorCode::parse, "token message must be 64 bytes");
  Token t;
  if (m[0] > static_cast<std::uint8_t>(TokenKind::metered)) throw Error(ErrorCode::parse, "unknown token kind tag");
  if ((m[1] & ~0x01) != 0) throw Error(ErrorCode::parse, "unknown token flags");
  for (int i = 2; i < 24; ++i) {
    if (m[static_cast<std::size_t>(i)] != 0) throw Error(ErrorCode::parse, "slice index exceeds 64 bits");
  }
  t.kind = static_cast<TokenKind>(m[0]);
  t.priority = (m[1] & 0x01) != 0;
  for (int b = 0; b < 8; ++b) t.slice_index = (t.slice_index << 8) | m[24 + static_cast<std::size_t>(b)];
  std::copy(m.begin() + 32, m.end(), t.nonce.begin());
  return t;
}

Token Token::generate(std::uint64_t slice_index, RandomSource& random) {
  Token t;
  t.slice_index = slice_index;
  random.fill(t.nonce);
  return t;
}

// --- RsaPublicKey ------------------------------------------------------------

struct RsaPublicKey::Impl {
  Bignum n;
  Bignum e;
  BN_MONT_CTX* mont = nullptr;
  std::size_t bytes = 0;

  ~Impl() { BN_MONT_CTX_free(mont); }
};

RsaPublicKey::RsaPublicKey(std::span<const std::uint8_t> modulus, std::span<const std::uint8_t> exponent)
    : impl_(std::make_unique<Impl>()) {
  impl_->n = bignum_from_bytes(modulus);
  impl_->e = bignum_from_bytes(exponent);
  if (BN_is_zero(impl_->n.get()) || !BN_is_odd(impl_->n.get()) || BN_is_zero(impl_->e.get())) {
    throw Error(ErrorCode::crypto, "invalid RSA public key");
  }
  impl_->bytes = static_cast<std::size_t>(BN_num_bytes(impl_->n.get()));
  impl_->mont = BN_MONT_CTX_new();
  if (impl_->mont == nullptr || BN_MONT_CTX_set(impl_->mont, impl_->n.get(), thread_bn_ctx()) != 1) {
    crypto_fail("BN_MONT_CTX_set");
  }
}

RsaPublicKey::~RsaPublicKey() = default;
RsaPublicKey::RsaPublicKey(RsaPublicKey&&) noexcept = default;
RsaPublicKey& RsaPublicKey::operator=(RsaPublicKey&&) noexcept = default;

const BIGNUM* RsaPublicKey::modulus() const { return impl_->n.get(); }
const BIGNUM* RsaPublicKey::exponent() const { return impl_->e.get(); }
std::size_t RsaPublicKey::modulus_bytes() const { return impl_->bytes; }
int RsaPublicKey::modulus_bits() const { return BN_num_bits(impl_->n.get()); }
Bytes RsaPublicKey::modulus_be() const { return bignum_to_bytes(impl_->n.get()); }
Bytes RsaPublicKey::exponent_be() const { return bignum_to_bytes(impl_->e.get()); }

Bignum RsaPublicKey::apply(const BIGNUM* base) const {
  Bignum out = make_bignum();
  if (BN_mod_exp_mont(out.get(), base, impl_->e.get(), impl_->n.get(), thread_bn_ctx(), impl_->mont) != 1) {
    crypto_fail("RSA public operation");
  }
  return out;
}

// --- RsaPrivateKey -----------------------------------------------------------

struct RsaPrivateKey::Impl {
  Pkey pkey;
  Bignum n;
  std::size_t bytes = 0;

  void init() {
    n = pkey_param(pkey.get(), OSSL_PKEY_PARAM_RSA_N);
    bytes = static_cast<std::size_t>(BN_num_bytes(n.get()));
  }
};

RsaPrivateKey::RsaPrivateKey(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
RsaPrivateKey::~RsaPrivateKey() = default;
RsaPrivateKey::RsaPrivateKey(RsaPrivateKey&&) noexcept = default;
RsaPrivateKey& RsaPrivateKey::operator=(RsaPrivateKey&&) noexcept = default;

RsaPrivateKey RsaPrivateKey::generate(int modulus_bits) {
  auto impl = std::make_unique<Impl>();
  impl->pkey.reset(EVP_RSA_gen(static_cast<unsigned int>(modulus_bits)));
  if (!impl->pkey) crypto_fail("RSA key generation");
  impl->init();
  return RsaPrivateKey(std::move(impl));
}

RsaPrivateKey RsaPrivateKey::from_pem(std::string_view pem) {
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())), &BIO_free);
  if (!bio) crypto_fail("BIO_new_mem_buf");
  auto impl = std::make_unique<Impl>();
  impl->pkey.reset(PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr));
  if (!impl->pkey || EVP_PKEY_get_base_id(impl->pkey.get()) != EVP_PKEY_RSA) crypto_fail("reading RSA private key");
  impl->init();
  return RsaPrivateKey(std::move(impl));
}

std::string RsaPrivateKey::to_pem() const {
  std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new(BIO_s_mem()), &BIO_free);
  if (!bio || PEM_write_bio_PrivateKey(bio.get(), impl_->pkey.get(), nullptr, nullptr, 0, nullptr, nullptr) != 1) {
    crypto_fail("writing RSA private key");
  }
  char* data = nullptr;
  const long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<std::size_t>(len));
}

RsaPublicKey RsaPrivateKey::public_key() const {
  const Bignum n = pkey_param(impl_->pkey.get(), OSSL_PKEY_PARAM_RSA_N);
  const Bignum e = pkey_param(impl_->pkey.get(), OSSL_PKEY_PARAM_RSA_E);
  return RsaPublicKey(bignum_to_bytes(n.get()), bignum_to_bytes(e.get()));
}

std::size_t RsaPrivateKey::modulus_bytes() const { return impl_->bytes; }

Bytes RsaPrivateKey::sign_raw(std::span<const std::uint8_t> value) const {
  if (value.size() != impl_->bytes) {
    throw Error(ErrorCode::domain, "raw RSA input must be " + std::to_string(impl_->bytes) + " bytes");
  }
  const Bignum v = bignum_from_bytes(value);
  if (BN_cmp(v.get(), impl_->n.get()) >= 0) throw Error(ErrorCode::domain, "raw RSA input not below modulus");
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(EVP_PKEY_CTX_new(impl_->pkey.get(), nullptr),
                                                                  &EVP_PKEY_CTX_free);
  if (!ctx || EVP_PKEY_sign_init(ctx.get()) != 1 || EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_NO_PADDING) != 1) {
    crypto_fail("RSA sign init");
  }
  Bytes out(impl_->bytes);
  std::size_t len = out.size();
  if (EVP_PKEY_sign(ctx.get(), out.data(), &len, value.data(), value.size()) != 1) crypto_fail("RSA sign");
  out.resize(len);
  if (len < impl_->bytes) out.insert(out.begin(), impl_->bytes - len, 0);
  return out;
}

// --- Key sets ----------------------------------------------------------------

const RsaPublicKey& PublicKeySet::key(std::uint64_t slice_index) const {
  if (slice_index >= keys.size()) {
    throw Error(ErrorCode::invalid_argument, "slice " + std::to_string(slice_index) + " outside period of " +
                                                 std::to_string(keys.size()) + " slices");
  }
  return keys[static_cast<std::size_t>(slice_index)];
}

SliceKeySet gen_period_keys(std::string period_id, std::size_t slices, int modulus_bits, unsigned threads) {
  if (slices == 0) throw Error(ErrorCode::invalid_argument, "a period needs at least one slice");
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(slices));

  std::vector<std::optional<RsaPrivateKey>> generated(slices);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned w) {
    try {
      for (std::size_t i = next++; i < slices; i = next++) generated[i].emplace(RsaPrivateKey::generate(modulus_bits));
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SliceKeySet set;
  set.public_part.period_id = std::move(period_id);
  set.signing_keys.reserve(slices);
  set.public_part.keys.reserve(slices);
  for (auto& k : generated) {
    set.public_part.keys.push_back(k->public_key());
    set.signing_keys.push_back(std::move(*k));
  }
  return set;
}

nlohmann::json public_keys_to_json(const PublicKeySet& keys) {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < keys.keys.size(); ++i) {
    list.push_back({{"slice_index", i},
                    {"modulus", to_hex(keys.keys[i].modulus_be())},
                    {"exponent", to_hex(keys.keys[i].exponent_be())}});
  }
  return {{"version", kRepositoryFormatVersion}, {"period_id", keys.period_id}, {"s", keys.keys.size()}, {"keys", list}};
}

PublicKeySet public_keys_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != kRepositoryFormatVersion) {
      throw Error(ErrorCode::parse, "unsupported key repository version");
    }
    PublicKeySet set;
    set.period_id = doc.at("period_id").get<std::string>();
    const auto s = doc.at("s").get<std::size_t>();
    const auto& list = doc.at("keys");
    if (list.size() != s) throw Error(ErrorCode::parse, "key repository lists " + std::to_string(list.size()) + " keys, s=" + std::to_string(s));
    for (std::size_t i = 0; i < s; ++i) {
      const auto& entry = list[i];
      if (entry.at("slice_index").get<std::size_t>() != i) throw Error(ErrorCode::parse, "key repository out of order");
      set.keys.emplace_back(from_hex(entry.at("modulus").get<std::string>()),
                            from_hex(entry.at("exponent").get<std::string>()));
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("key repository: ") + e.what());
  }
}

nlohmann::json private_keys_to_json(const SliceKeySet& keys) {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < keys.signing_keys.size(); ++i) {
    list.push_back({{"slice_index", i}, {"pem", keys.signing_keys[i].to_pem()}});
  }
  return {{"version", kRepositoryFormatVersion},
          {"period_id", keys.public_part.period_id},
          {"s", keys.signing_keys.size()},
          {"keys", list}};
}

SliceKeySet private_keys_from_json(const nlohmann::json& doc) {
  try {
    SliceKeySet set;
    set.public_part.period_id = doc.at("period_id").get<std::string>();
    const auto& list = doc.at("keys");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].at("slice_index").get<std::size_t>() != i) throw Error(ErrorCode::parse, "private keys out of order");
      set.signing_keys.push_back(RsaPrivateKey::from_pem(list[i].at("pem").get<std::string>()));
      set.public_part.keys.push_back(set.signing_keys.back().public_key());
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("private key file: ") + e.what());
  }
}

// --- Blind signatures --------------------------------------------------------

Bignum full_domain_hash(std::span<const std::uint8_t> message, const RsaPublicKey& key) {
  static constexpr std::string_view kTag = "pgpp-token-fdh";
  const std::size_t want = key.modulus_bytes() + 16;
  Bytes expanded;
  expanded.reserve(want + 32);
  for (std::uint32_t counter = 0; expanded.size() < want; ++counter) {
    const std::uint8_t ctr[4] = {static_cast<std::uint8_t>(counter >> 24), static_cast<std::uint8_t>(counter >> 16),
                                 static_cast<std::uint8_t>(counter >> 8), static_cast<std::uint8_t>(counter)};
    const Digest block = sha256({std::span<const std::uint8_t>(ctr, 4), as_bytes(kTag), message});
    expanded.insert(expanded.end(), block.begin(), block.end());
  }
  expanded.resize(want);
  Bignum wide = bignum_from_bytes(expanded);
  Bignum out = make_bignum();
  if (BN_mod(out.get(), wide.get(), key.modulus(), thread_bn_ctx()) != 1) crypto_fail("FDH reduction");
  return out;
}

BlindedToken blind(const Token& token, const RsaPublicKey& key, RandomSource& random) {
  const Message m = token.message();
  const Bignum h = full_domain_hash(m, key);
  BN_CTX* ctx = thread_bn_ctx();
  Bytes raw(key.modulus_bytes() + 16);
  Bignum b = make_bignum();
  Bignum b_inv = make_bignum();
  while (true) {
    random.fill(raw);
    Bignum wide = bignum_from_bytes(raw);
    if (BN_mod(b.get(), wide.get(), key.modulus(), ctx) != 1) crypto_fail("blinding factor");
    if (BN_is_zero(b.get()) || BN_is_one(b.get())) continue;
    ERR_set_mark();
    BIGNUM* inv = BN_mod_inverse(b_inv.get(), b.get(), key.modulus(), ctx);
    ERR_pop_to_mark();
    if (inv != nullptr) break;
  }
  const Bignum b_e = key.apply(b.get());
  Bignum blinded = make_bignum();
  if (BN_mod_mul(blinded.get(), h.get(), b_e.get(), key.modulus(), ctx) != 1) crypto_fail("blinding");
  return BlindedToken{bignum_to_bytes(blinded.get(), key.modulus_bytes()),
                      bignum_to_bytes(b_inv.get(), key.modulus_bytes())};
}

Bytes sign_blinded(std::span<const std::uint8_t> blinded_message, const RsaPrivateKey& key) {
  return key.sign_raw(blinded_message);
}

std::vector<Bytes> sign_blinded_batch(std::span<const Bytes> blinded_messages, const SliceKeySet& keys) {
  if (blinded_messages.size() > keys.slice_count()) {
    throw Error(ErrorCode::invalid_argument, "more signing requests than slices");
  }
  std::vector<Bytes> out;
  out.reserve(blinded_messages.size());
  for (std::size_t i = 0; i < blinded_messages.size(); ++i) {
    out.push_back(sign_blinded(blinded_messages[i], keys.signing_keys[i]));
  }
  return out;
}

Bytes unblind(std::span<const std::uint8_t> blinded_signature, std::span<const std::uint8_t> unblinding_secret,
              const RsaPublicKey& key) {
  const Bignum s = bignum_from_bytes(blinded_signature);
  const Bignum r = bignum_from_bytes(unblinding_secret);
  Bignum out = make_bignum();
  if (BN_mod_mul(out.get(), s.get(), r.get(), key.modulus(), thread_bn_ctx()) != 1) crypto_fail("unblinding");
  return bignum_to_bytes(out.get(), key.modulus_bytes());
}

bool verify_signature(const SignedToken& signed_token, const RsaPublicKey& key) {
  if (signed_token.signature.size() != key.modulus_bytes()) return false;
  const Bignum sig = bignum_from_bytes(signed_token.signature);
  if (BN_cmp(sig.get(), key.modulus()) >= 0) return false;
  const Bignum recovered = key.apply(sig.get());
  const Bignum expected = full_domain_hash(signed_token.token.message(), key);
  return BN_cmp(recovered.get(), expected.get()) == 0;
}

}  // namespace pgpp::tokens
