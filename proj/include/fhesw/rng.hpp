#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fhesw {

/// Seeded sampler for keys, masks and noise. One instance per logical task;
/// use fork() to derive independent, reproducible sub-streams.
class Rng {
 public:
  static constexpr double kDefaultSigma = 3.2;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream keyed by (seed, stream id).
  Rng fork(std::uint64_t stream) const;

  std::uint64_t next_u64() { return engine_(); }
  std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_() >> 32); }

  /// Uniform in [0, bound).
  std::uint64_t uniform(std::uint64_t bound);

  /// Uniform in {-1, 0, 1}.
  std::int64_t ternary();

  /// Uniform in {0, 1}.
  std::int64_t binary() { return static_cast<std::int64_t>(engine_() >> 63); }

  /// Rounded continuous Gaussian.
  std::int64_t gaussian(double sigma = kDefaultSigma);

  std::vector<std::int64_t> ternary_vector(std::size_t n);
  std::vector<std::int64_t> binary_vector(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace fhesw
