#pragma once

#include <cstdint>
#include <span>

namespace zsinfer {

// Deterministic counter-style generator (PCG32, O'Neill's pcg32_random_r).
// A (seed, stream) pair fully determines the draw sequence on every platform;
// distinct streams are statistically independent. All distribution helpers
// below consume draws only from this generator, so replaying a pair replays
// every downstream result bit for bit.
class Pcg32 {
 public:
  Pcg32() : Pcg32(0, 0) {}
  Pcg32(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double next_double();

  // Uniform integer in [0, n). n must be positive.
  std::int64_t uniform_int(std::int64_t n);

  // Exponential with the given rate (rate > 0).
  double exponential(double rate);

  // Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1. shape > 0.
  double gamma(double shape);

  // Beta(a, b) from a pair of gamma draws. a, b > 0.
  double beta(double a, double b);

  // Index draw proportional to nonnegative weights with a positive total.
  int categorical(std::span<const double> weights);

  // Symmetric Dirichlet with the given concentration, written into out.
  void dirichlet(double concentration, std::span<double> out);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace zsinfer
