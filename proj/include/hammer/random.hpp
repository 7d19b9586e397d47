#pragma once

#include <cstdint>
#include <random>

namespace hammer {

using Engine = std::mt19937_64;

// Independent stream for (seed, stream). Restarts, trials and shuffles each
// take their own stream so results do not depend on scheduling.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Engine(seq);
}

// Uniform integer in [0, bound). Unlike std::uniform_int_distribution the
// sequence is identical across standard library implementations.
inline std::uint64_t uniform_index(Engine& engine, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = Engine::max() - (Engine::max() % bound + 1) % bound;
  std::uint64_t x = engine();
  while (x > limit) x = engine();
  return x % bound;
}

// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform_unit(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace hammer
