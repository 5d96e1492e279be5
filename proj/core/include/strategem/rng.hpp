#pragma once

#include <cstdint>
#include <initializer_list>

namespace strategem {

// Counter-based deterministic random stream built on the splitmix64 update.
// Streams are cheap to derive: every (seed, path...) combination names an
// independent stream, so work items can be assigned their own stream by
// index and results do not depend on how items are spread across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double next_double();

  // Uniform on [lo, hi).
  double next_uniform(double lo, double hi);

  // Standard normal via Box-Muller; consumes two uniforms per draw.
  double next_gaussian();

  // -1 or +1 with equal probability.
  double next_rademacher();

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

// Hash-derives an independent stream from a master seed and a path of tags.
// derive_rng(s, {a, b}) and derive_rng(s, {a, c}) are decorrelated for b != c.
Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

// Same derivation, returned as a plain seed for APIs that take one.
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path);

std::uint64_t mix_u64(std::uint64_t x);

}  // namespace strategem
