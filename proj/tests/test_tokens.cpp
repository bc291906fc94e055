#include <doctest.h>

#include <atomic>
#include <barrier>
#include <cmath>
#include <filesystem>
#include <thread>

#include <unistd.h>

#include "pgpp/error.hpp"
#include "pgpp/spend.hpp"
#include "pgpp/spent_store.hpp"
#include "pgpp/tokens.hpp"
#include "pgpp/wallet.hpp"

using namespace pgpp;
using namespace pgpp::tokens;

namespace {

// 1024-bit keys keep the suite fast; the scheme is width-agnostic.
constexpr int kTestBits = 1024;

const SliceKeySet& keys4() {
  static const SliceKeySet k = gen_period_keys("2026-10", 4, kTestBits, 1);
  return k;
}

SignedToken issue(const SliceKeySet& keys, std::uint64_t slice, RandomSource& random) {
  const Token t = Token::generate(slice, random);
  const RsaPublicKey& pub = keys.public_part.key(slice);
  const BlindedToken b = blind(t, pub, random);
  const Bytes blinded_sig = sign_blinded(b.blinded_message, keys.signing_keys[slice]);
  return SignedToken{t, unblind(blinded_sig, b.unblinding_secret, pub)};
}

class DownStore final : public SpentTokenStore {
 public:
  InsertResult insert(const SpentKey&) override { throw StoreUnavailable("store offline"); }
  bool contains(const SpentKey&) const override { throw StoreUnavailable("store offline"); }
  std::vector<SpentKey> snapshot() const override { return {}; }
};

std::filesystem::path temp_db(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pgpp_test_" + name + "_" + std::to_string(::getpid()) + ".db");
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_CASE("token message layout") {
  SeededRandom random(1);
  Token t = Token::generate(0x0102030405060708ULL, random);
  const Message m = t.message();
  for (int i = 0; i < 24; ++i) CHECK(m[static_cast<std::size_t>(i)] == 0);
  for (int i = 0; i < 8; ++i) CHECK(m[static_cast<std::size_t>(24 + i)] == i + 1);
  CHECK(std::equal(t.nonce.begin(), t.nonce.end(), m.begin() + 32));
  CHECK(Token::from_message(m) == t);

  t.kind = TokenKind::metered;
  t.priority = true;
  const Message tagged = t.message();
  CHECK(tagged[0] == 1);
  CHECK(tagged[1] == 1);
  CHECK(Token::from_message(tagged) == t);

  Message bad = m;
  bad[5] = 1;
  CHECK_THROWS_AS(Token::from_message(bad), Error);
  bad = m;
  bad[0] = 9;
  CHECK_THROWS_AS(Token::from_message(bad), Error);
  CHECK_THROWS_AS(Token::from_message(std::vector<std::uint8_t>(63)), Error);

  const Token other = Token::generate(0x0102030405060708ULL, random);
  CHECK(other.nonce != Token::generate(0x0102030405060708ULL, random).nonce);
}

TEST_CASE("blind signature round trip") {
  const SliceKeySet& keys = keys4();
  SystemRandom random;
  for (std::uint64_t slice = 0; slice < 4; ++slice) {
    const SignedToken st = issue(keys, slice, random);
    CHECK(verify_signature(st, keys.public_part.key(slice)));
    CHECK_FALSE(verify_signature(st, keys.public_part.key((slice + 1) % 4)));
  }
  SUBCASE("two blindings of one token differ") {
    const Token t = Token::generate(1, random);
    const auto& pub = keys.public_part.key(1);
    CHECK(blind(t, pub, random).blinded_message != blind(t, pub, random).blinded_message);
  }
  SUBCASE("blinded values at or above the modulus are refused") {
    const auto& pub = keys.public_part.key(0);
    Bytes too_big = pub.modulus_be();
    CHECK_THROWS_AS(sign_blinded(too_big, keys.signing_keys[0]), Error);
    Bytes ff(pub.modulus_bytes(), 0xff);
    CHECK_THROWS_AS(sign_blinded(ff, keys.signing_keys[0]), Error);
  }
  SUBCASE("batch issue and finalize") {
    const PendingIssue pending = prepare_issue(keys.public_part, random);
    REQUIRE(pending.tokens.size() == 4);
    std::vector<Bytes> requests;
    for (const auto& b : pending.blinded) requests.push_back(b.blinded_message);
    const std::vector<Bytes> responses = sign_blinded_batch(requests, keys);
    const Wallet w = finalize_issue(pending, responses, keys.public_part);
    REQUIRE(w.tokens.size() == 4);
    for (std::uint64_t i = 0; i < 4; ++i) {
      REQUIRE(w.find(i).has_value());
      CHECK(w.find(i)->token.slice_index == i);
      CHECK(verify_signature(*w.find(i), keys.public_part.key(i)));
    }
    CHECK_FALSE(w.find(4).has_value());
    auto swapped = responses;
    std::swap(swapped[0], swapped[1]);
    CHECK_THROWS_AS(finalize_issue(pending, swapped, keys.public_part), Error);
    const PendingIssue back = pending_from_json(pending_to_json(pending));
    CHECK(back.tokens == pending.tokens);
    CHECK(back.blinded[2].unblinding_secret == pending.blinded[2].unblinding_secret);
  }
}

TEST_CASE("verify and spend") {
  const SliceKeySet& keys = keys4();
  SystemRandom random;
  InMemorySpentStore store;
  const SignedToken st = issue(keys, 2, random);

  CHECK(verify_and_spend(st, keys.public_part, store, 1) == Verdict::wrong_slice);
  CHECK(verify_and_spend(st, keys.public_part, store, 3) == Verdict::wrong_slice);
  CHECK(store.snapshot().empty());
  CHECK(verify_and_spend(st, keys.public_part, store, 2) == Verdict::accepted);
  CHECK(verify_and_spend(st, keys.public_part, store, 2) == Verdict::double_spend);
  CHECK(store.snapshot().size() == 1);
  CHECK(store.contains(spent_key_for(st, keys.public_part.period_id)));

  SUBCASE("grace window admits the previous slice") {
    const SignedToken late = issue(keys, 1, random);
    CHECK(verify_and_spend(late, keys.public_part, store, 2, SliceWindow{1}) == Verdict::accepted);
  }
  SUBCASE("tampering breaks the signature") {
    SignedToken forged = issue(keys, 2, random);
    forged.token.nonce[0] ^= 1;
    CHECK(verify_and_spend(forged, keys.public_part, store, 2) == Verdict::bad_signature);
    SignedToken moved = issue(keys, 2, random);
    moved.token.slice_index = 3;
    CHECK(verify_and_spend(moved, keys.public_part, store, 3) == Verdict::bad_signature);
    SignedToken outside = st;
    outside.token.slice_index = 9;
    CHECK(verify_and_spend(outside, keys.public_part, store, 9) == Verdict::wrong_slice);
  }
  SUBCASE("an unreachable store is an error, never an accept") {
    DownStore down;
    const SignedToken fresh = issue(keys, 2, random);
    CHECK_THROWS_AS(verify_and_spend(fresh, keys.public_part, down, 2), StoreUnavailable);
    // Bad tokens are rejected before touching the store.
    SignedToken bad = fresh;
    bad.signature[3] ^= 1;
    CHECK(verify_and_spend(bad, keys.public_part, down, 2) == Verdict::bad_signature);
  }
  SUBCASE("random forgeries are rejected") {
    SeededRandom noise(5);
    const auto& pub = keys.public_part.key(0);
    int accepts = 0;
    for (int i = 0; i < 20000; ++i) {
      SignedToken f;
      f.token = Token::generate(0, noise);
      f.signature.resize(pub.modulus_bytes());
      noise.fill(f.signature);
      f.signature[0] &= 0x7f;
      if (verify_and_spend(f, keys.public_part, store, 0) == Verdict::accepted) ++accepts;
    }
    CHECK(accepts == 0);
  }
}

TEST_CASE("concurrent presenters of one token") {
  const SliceKeySet& keys = keys4();
  SystemRandom random;
  auto trial = [&](SpentTokenStore& store, int presenters) {
    const SignedToken st = issue(keys, 0, random);
    std::atomic<int> accepted{0};
    std::atomic<int> doubles{0};
    std::barrier sync(presenters);
    std::vector<std::thread> threads;
    for (int t = 0; t < presenters; ++t) {
      threads.emplace_back([&] {
        sync.arrive_and_wait();
        const Verdict v = verify_and_spend(st, keys.public_part, store, 0);
        if (v == Verdict::accepted) ++accepted;
        if (v == Verdict::double_spend) ++doubles;
      });
    }
    for (auto& th : threads) th.join();
    CHECK(accepted == 1);
    CHECK(doubles == presenters - 1);
  };
  InMemorySpentStore mem;
  const auto path = temp_db("concurrent");
  SqliteSpentStore sqlite(path.string());
  for (int presenters : {2, 8, 64}) {
    for (int i = 0; i < 20; ++i) {
      trial(mem, presenters);
      trial(sqlite, presenters);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("sqlite store is durable and shared") {
  const auto path = temp_db("durable");
  SpentKey key{"p", 3, {}};
  key.digest[0] = 0xab;
  {
    SqliteSpentStore a(path.string());
    CHECK(a.insert(key) == InsertResult::inserted);
    SqliteSpentStore b(path.string());
    CHECK(b.insert(key) == InsertResult::already_present);
  }
  SqliteSpentStore reopened(path.string());
  CHECK(reopened.contains(key));
  const auto snap = reopened.snapshot();
  REQUIRE(snap.size() == 1);
  CHECK(snap[0] == key);
  SpentKey other = key;
  other.slice_index = 4;
  CHECK_FALSE(reopened.contains(other));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(SqliteSpentStore("/nonexistent-dir/x/spent.db"), StoreUnavailable);
}

TEST_CASE("key repository serialization") {
  const SliceKeySet& keys = keys4();
  const nlohmann::json pub = public_keys_to_json(keys.public_part);
  CHECK(pub.at("version") == kRepositoryFormatVersion);
  CHECK(pub.at("s") == 4);
  const PublicKeySet back = public_keys_from_json(nlohmann::json::parse(pub.dump()));
  CHECK(back.period_id == "2026-10");
  REQUIRE(back.slice_count() == 4);
  for (std::uint64_t i = 0; i < 4; ++i) {
    CHECK(back.key(i).modulus_be() == keys.public_part.key(i).modulus_be());
    CHECK(back.key(i).exponent_be() == keys.public_part.key(i).exponent_be());
  }
  const SliceKeySet priv = private_keys_from_json(private_keys_to_json(keys));
  SystemRandom random;
  const SignedToken st = issue(priv, 3, random);
  CHECK(verify_signature(st, keys.public_part.key(3)));

  nlohmann::json broken = pub;
  broken["s"] = 5;
  CHECK_THROWS_AS(public_keys_from_json(broken), Error);
  broken = pub;
  broken["version"] = 99;
  CHECK_THROWS_AS(public_keys_from_json(broken), Error);
  CHECK_THROWS_AS(keys.public_part.key(4), Error);
  CHECK_THROWS_AS(gen_period_keys("x", 0, kTestBits), Error);
}

TEST_CASE("periods have independent keys") {
  const SliceKeySet one = gen_period_keys("a", 1, kTestBits, 1);
  CHECK(one.slice_count() == 1);
  const SliceKeySet& four = keys4();
  std::set<Bytes> moduli;
  moduli.insert(one.public_part.key(0).modulus_be());
  for (std::uint64_t i = 0; i < 4; ++i) moduli.insert(four.public_part.key(i).modulus_be());
  CHECK(moduli.size() == 5);
}

TEST_CASE("default keys are 2048-bit") {
  const SliceKeySet k = gen_period_keys("p", 1);
  CHECK(k.public_part.key(0).modulus_bits() == 2048);
  CHECK(k.public_part.key(0).modulus_bytes() == 256);
}

TEST_CASE("wallet formats") {
  const SliceKeySet& keys = keys4();
  SystemRandom random;
  Wallet w{"2026-10", {}};
  for (std::uint64_t i = 0; i < 4; ++i) w.tokens.push_back(issue(keys, i, random));
  const Wallet from_json = wallet_from_json(nlohmann::json::parse(wallet_to_json(w).dump()));
  CHECK(from_json.period_id == w.period_id);
  CHECK(from_json.tokens == w.tokens);
  const Bytes bin = wallet_to_binary(w);
  CHECK(std::string(bin.begin(), bin.begin() + 4) == "PGW1");
  CHECK(wallet_from_binary(bin).tokens == w.tokens);
  Bytes truncated(bin.begin(), bin.end() - 1);
  CHECK_THROWS_AS(wallet_from_binary(truncated), Error);

  SUBCASE("a month of hourly 2048-bit tokens fits in 2 MB") {
    SeededRandom noise(3);
    Wallet month{"2026-11", {}};
    for (std::uint64_t i = 0; i < 720; ++i) {
      SignedToken t{Token::generate(i, noise), Bytes(256)};
      noise.fill(t.signature);
      month.tokens.push_back(std::move(t));
    }
    CHECK(wallet_to_binary(month).size() <= 2u * 1024 * 1024);
    CHECK(wallet_to_json(month).dump().size() <= 2u * 1024 * 1024);
  }
}

TEST_CASE("signer cannot link issued and spent tokens") {
  // Signer sees two blinded requests in issue order, later both tokens in a
  // random order, and guesses the order. Its strategy compares residues mod
  // small primes, which would expose unblinded FDH values.
  const SliceKeySet& keys = keys4();
  const auto& pub = keys.public_part.key(0);
  SeededRandom random(11);
  Rng coin(12);
  auto residue = [](std::span<const std::uint8_t> be, unsigned p) {
    unsigned r = 0;
    for (auto b : be) r = (r * 256 + b) % p;
    return r;
  };
  const int games = 10000;
  int wins = 0;
  for (int g = 0; g < games; ++g) {
    const Token t0 = Token::generate(0, random);
    const Token t1 = Token::generate(0, random);
    const BlindedToken b0 = blind(t0, pub, random);
    const BlindedToken b1 = blind(t1, pub, random);
    const bool swapped = (coin() & 1) != 0;
    const Token& first = swapped ? t1 : t0;
    const Bytes fdh_first = bignum_to_bytes(full_domain_hash(first.message(), pub).get(), pub.modulus_bytes());
    const bool guess_swapped = residue(fdh_first, 3) != residue(b0.blinded_message, 3);
    (void)b1;
    if (guess_swapped == swapped) ++wins;
  }
  const double rate = static_cast<double>(wins) / games;
  const double half_width = 2.5758 * std::sqrt(0.25 / games);
  CHECK(std::abs(rate - 0.5) <= half_width);
}
