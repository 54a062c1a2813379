#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gnids {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed and a fixed stage
/// label ("split", "synth", "train.gnn", ...). Pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

inline Rng make_rng(std::uint64_t master, std::string_view label) {
  return Rng(derive_seed(master, label));
}

/// Uniform double in [0, 1) built from the top 53 bits; unlike
/// std::uniform_real_distribution its output is fixed across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

}  // namespace gnids
