#include "fhesw/rng.hpp"

#include <cmath>

namespace fhesw {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::fork(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  // Rejection sampling keeps the stream independent of library distribution
  // implementations.
  if (bound == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::int64_t Rng::ternary() { return static_cast<std::int64_t>(uniform(3)) - 1; }

std::int64_t Rng::gaussian(double sigma) {
  // Box-Muller on two 53-bit uniforms.
  const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  return static_cast<std::int64_t>(std::llround(z * sigma));
}

std::vector<std::int64_t> Rng::ternary_vector(std::size_t n) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = ternary();
  return v;
}

std::vector<std::int64_t> Rng::binary_vector(std::size_t n) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = binary();
  return v;
}

}  // namespace fhesw
