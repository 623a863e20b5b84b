#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace slicebench {

/// Engine type used for every random stream in the library.
using Rng = std::mt19937_64;

/// Mixes a master seed with a stream label into an engine seed. Distinct
/// labels give decorrelated streams; the same (seed, label) pair always
/// reproduces the same sequence.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label);

inline Rng derive_stream(std::uint64_t master_seed, std::string_view label) {
  return Rng(derive_seed(master_seed, label));
}

}  // namespace slicebench
