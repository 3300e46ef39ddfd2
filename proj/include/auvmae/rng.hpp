#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace auvmae {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed and a purpose key.
///
/// seed = splitmix64(master ^ fnv1a64(purpose) ^ splitmix64(index)).
/// Every random consumer in the pipeline takes its seed through this function
/// so that one `--seed` value pins the whole run.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);

inline Rng make_rng(std::uint64_t master, std::string_view purpose,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(master, purpose, index));
}

}  // namespace auvmae
