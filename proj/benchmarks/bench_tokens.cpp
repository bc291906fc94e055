#include <benchmark/benchmark.h>

#include "pgpp/spend.hpp"
#include "pgpp/tokens.hpp"

using namespace pgpp;
using namespace pgpp::tokens;

namespace {

const SliceKeySet& keys() {
  static const SliceKeySet k = gen_period_keys("bench", 1);
  return k;
}

SignedToken issue(RandomSource& random) {
  const Token t = Token::generate(0, random);
  const auto& pub = keys().public_part.key(0);
  const BlindedToken b = blind(t, pub, random);
  return {t, unblind(sign_blinded(b.blinded_message, keys().signing_keys[0]), b.unblinding_secret, pub)};
}

void BM_Verify(benchmark::State& state) {
  SystemRandom random;
  const SignedToken st = issue(random);
  for (auto _ : state) benchmark::DoNotOptimize(verify_signature(st, keys().public_part.key(0)));
}
BENCHMARK(BM_Verify);

void BM_Blind(benchmark::State& state) {
  SystemRandom random;
  const Token t = Token::generate(0, random);
  for (auto _ : state) benchmark::DoNotOptimize(blind(t, keys().public_part.key(0), random));
}
BENCHMARK(BM_Blind);

void BM_SignBlinded(benchmark::State& state) {
  SystemRandom random;
  const BlindedToken b = blind(Token::generate(0, random), keys().public_part.key(0), random);
  for (auto _ : state) benchmark::DoNotOptimize(sign_blinded(b.blinded_message, keys().signing_keys[0]));
}
BENCHMARK(BM_SignBlinded);

void BM_VerifyAndSpend(benchmark::State& state) {
  SystemRandom random;
  std::vector<SignedToken> tokens;
  for (int i = 0; i < 256; ++i) tokens.push_back(issue(random));
  InMemorySpentStore store;
  std::size_t i = 0;
  for (auto _ : state) {
    // Mostly double spends after the first lap; the cost is dominated by the signature check.
    benchmark::DoNotOptimize(verify_and_spend(tokens[i++ % tokens.size()], keys().public_part, store, 0));
  }
}
BENCHMARK(BM_VerifyAndSpend);

}  // namespace
