#pragma once

#include <cstdint>
#include <vector>

namespace panelstat {

// SplitMix64 (Steele, Lea & Flood 2014). Chosen as the project-wide PRNG
// because the whole state + transition fits in one line and the stream is
// identical on every platform. All randomness in the library flows through
// this generator; there is no other entropy source.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) via the multiply-shift reduction
  // (Lemire 2019, without rejection). Deterministic across platforms.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Seed of substream `stream` of a master seed. Equals the output the
// generator seeded with `seed` would produce at step `stream`, so
// substreams are disjoint slices of one SplitMix64 sequence. Used to give
// bootstrap replicates and simulated questions independent streams whose
// draws do not depend on evaluation order.
inline std::uint64_t derive_stream_seed(std::uint64_t seed,
                                        std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Resample indices for bootstrap replicate `rep`: `count` draws from
// [0, count) with replacement. Exposed so callers can verify that paired
// analyses really consumed identical index vectors.
inline std::vector<std::size_t> bootstrap_indices(std::uint64_t seed,
                                                  std::uint64_t rep,
                                                  std::size_t count) {
  SplitMix64 gen(derive_stream_seed(seed, rep));
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) {
    idx[i] = static_cast<std::size_t>(gen.next_below(count));
  }
  return idx;
}

}  // namespace panelstat
