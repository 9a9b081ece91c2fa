#pragma once

#include <cstdint>
#include <random>

namespace splitree {

using Rng = std::mt19937_64;

inline auto splitmix64(std::uint64_t x) -> std::uint64_t {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Private stream for one replicate; depends only on (master seed, index), so
// results do not depend on how replicates are spread over workers.
inline auto replicate_rng(std::uint64_t master_seed, std::uint64_t index, std::uint64_t stream = 0)
    -> Rng {
  auto s = splitmix64(master_seed ^ splitmix64(index + 0x632be59bd9b4e019ULL * (stream + 1)));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline auto draw_exponential(Rng& rng, double rate) -> double {
  return std::exponential_distribution<double>(rate)(rng);
}

inline auto draw_uniform(Rng& rng, double lo = 0.0, double hi = 1.0) -> double {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace splitree
