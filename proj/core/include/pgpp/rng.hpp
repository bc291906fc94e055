#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pgpp {

// All simulation randomness flows through mt19937_64. Distribution helpers
// below are hand-rolled so that streams are identical across standard
// library implementations.
using Rng = std::mt19937_64;

// Derives an independent stream seed from a master seed, a purpose label and
// an index (e.g. a UE id).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index = 0);

// Uniform integer in [0, n). n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Uniform double in [0, 1) with 53 bits of precision.
double uniform01(Rng& rng);

double uniform_real(Rng& rng, double lo, double hi);

// Standard normal variate (Box-Muller, one value per call).
double standard_normal(Rng& rng);

}  // namespace pgpp
