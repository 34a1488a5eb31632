#pragma once

#include <cstdint>
#include <random>

namespace covsv {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to turn (seed, stream ids) into well-mixed seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for an independent stream identified by (seed, stream, substream).
// Replicate r of ensemble e uses derive_seed(seed, e, r); the result depends
// only on the identifiers, never on execution order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0);

}  // namespace covsv
