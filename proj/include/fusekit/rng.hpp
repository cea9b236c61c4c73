#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fusekit {

// Seeded generator with bit-exact output across platforms.
//
// The engine is std::mt19937_64, whose sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so the
// conversions are done here:
//   uniform(): top 53 bits of one engine draw times 2^-53, in [0,1).
//   normal():  Box-Muller cosine branch from two uniform() draws
//              (u1 mapped to (0,1] as 1 - u1); the sine branch is discarded.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer of (seed, FNV-1a(key)). Gives every image id its own
// stream so per-image work can run in any order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

}  // namespace fusekit
