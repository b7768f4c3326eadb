#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace selmean {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of an independent stream keyed by (master, a, b). Used as
/// (master seed, grid point, replication) so that every replication has its
/// own stream regardless of which worker runs it.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept;

/// xoshiro256++ engine, state filled from a single seed through SplitMix64.
/// Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

 private:
  std::array<std::uint64_t, 4> s_;
};

/// Per-replication source of N(0, 1) variates.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double standard_normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }

 private:
  Xoshiro256pp engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace selmean
