// Deterministic per-stream random number generator for reproducible runs.
#pragma once

#include <cstdint>

namespace coexsim {

// SplitMix64, algorithm version "splitmix64-v1".  Chosen over std engines so
// that draw sequences are bit-identical across platforms and standard library
// versions.  One independent stream per (run seed, node index): the streams
// are decorrelated by hashing the node index into the seed.
class SplitMix64 {
 public:
  static constexpr const char* kAlgorithm = "splitmix64-v1";

  SplitMix64() : state_(0) {}
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static SplitMix64 for_node(std::uint64_t run_seed, std::uint64_t node_index) {
    SplitMix64 mixer(run_seed);
    std::uint64_t a = mixer.next();
    SplitMix64 mixer2(0x9E3779B97F4A7C15ULL * (node_index + 1));
    return SplitMix64(a ^ mixer2.next());
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, n).  Modulo bias is < 2^-59 for the contention
  // windows used here and keeps the draw a single deterministic step.
  std::uint64_t uniform(std::uint64_t n) { return n <= 1 ? 0 : next() % n; }

 private:
  std::uint64_t state_;
};

// Backoff slot count drawn uniformly from [0, cw-1].
inline int backoff_draw(SplitMix64& rng, int cw) {
  return static_cast<int>(rng.uniform(static_cast<std::uint64_t>(cw)));
}

}  // namespace coexsim
