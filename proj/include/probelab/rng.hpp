#pragma once

#include <cstdint>
#include <random>

namespace probelab {

using Engine = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return derive_seed(derive_seed(seed, stream), index);
}

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

// Stream tags keep the generators of different subsystems apart.
namespace stream {
inline constexpr std::uint64_t feature_bank = 1;
inline constexpr std::uint64_t synth_row = 2;
inline constexpr std::uint64_t split = 3;
inline constexpr std::uint64_t fit = 4;
inline constexpr std::uint64_t ccs_restart = 5;
inline constexpr std::uint64_t kmeans = 6;
inline constexpr std::uint64_t logreg = 7;
}  // namespace stream

}  // namespace probelab
