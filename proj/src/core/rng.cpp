#include "covsv/core/rng.hpp"

namespace covsv {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  return mix64(mix64(mix64(seed) ^ stream) ^ (substream * 0xd1342543de82ef95ULL));
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(derive_seed(seed, stream, substream)),
                    static_cast<std::uint32_t>(derive_seed(seed, stream, substream) >> 32)};
  return Rng(seq);
}

}  // namespace covsv
