#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace oymb {

using Rng = std::mt19937_64;

// Independent generator for sub-stream `stream` of a run seeded with `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Uniform integer in the closed range [lo, hi].
int uniform_int(Rng& rng, int lo, int hi);

// Uniform real in [lo, hi).
double uniform_real(Rng& rng, double lo, double hi);

}  // namespace oymb
