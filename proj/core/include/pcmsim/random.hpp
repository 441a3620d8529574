#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pcmsim {

using Rng = std::mt19937_64;

/// Derives an independent 64-bit seed from a master seed and a path of
/// stream identifiers (layer, member, purpose, ...). The result depends only
/// on the inputs, never on call order.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

// Stream purposes used with derive_seed.
enum class Stream : std::uint64_t {
  kProgram = 1,
  kRead = 2,
  kArbitration = 3,
  kSampler = 4,
  kEncoder = 5,
  kSplit = 6,
  kTrain = 7,
  kData = 8,
  kLabels = 9,
};

constexpr std::uint64_t id(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace pcmsim
