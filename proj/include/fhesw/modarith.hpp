#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fhesw/common.hpp"

namespace fhesw {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

class TwiddleTable;

/// A word-size prime modulus with precomputed Barrett constants. When built
/// with a ring degree it also carries a primitive 2N-th root of unity and the
/// twiddle table for that degree.
class Modulus {
 public:
  static constexpr unsigned kMaxBits = 62;

  Modulus() = default;
  explicit Modulus(u64 q);
  Modulus(u64 q, std::size_t n);

  u64 value() const noexcept { return q_; }
  unsigned bit_count() const noexcept { return bits_; }
  std::size_t degree() const noexcept { return n_; }
  bool has_roots() const noexcept { return n_ != 0; }
  u64 psi() const noexcept { return psi_; }
  u64 psi_inv() const noexcept { return psi_inv_; }
  u64 n_inv() const noexcept { return n_inv_; }
  const TwiddleTable& twiddles() const;

  /// Reduces a 128-bit value. Valid for inputs below q^2.
  u64 reduce(u128 x) const noexcept {
    const u64 lo = static_cast<u64>(x);
    const u64 hi = static_cast<u64>(x >> 64);
    // floor(x * ratio / 2^128), keeping only the low word of the quotient.
    const u64 carry = static_cast<u64>((static_cast<u128>(lo) * ratio_lo_) >> 64);
    const u128 t = static_cast<u128>(lo) * ratio_hi_;
    const u128 mid = static_cast<u128>(static_cast<u64>(t)) + carry;
    const u64 tmp3 = static_cast<u64>(t >> 64) + static_cast<u64>(mid >> 64);
    const u128 t2 = static_cast<u128>(hi) * ratio_lo_;
    const u128 mid2 = static_cast<u128>(static_cast<u64>(mid)) + static_cast<u64>(t2);
    const u64 carry2 = static_cast<u64>(t2 >> 64) + static_cast<u64>(mid2 >> 64);
    const u64 quot = hi * ratio_hi_ + tmp3 + carry2;
    u64 r = lo - quot * q_;
    while (r >= q_) r -= q_;
    return r;
  }

  u64 reduce(u64 x) const noexcept { return reduce(static_cast<u128>(x)); }

  bool operator==(const Modulus& o) const noexcept { return q_ == o.q_; }

 private:
  u64 q_ = 0;
  unsigned bits_ = 0;
  u64 ratio_hi_ = 0;  // floor(2^128 / q), high word
  u64 ratio_lo_ = 0;
  std::size_t n_ = 0;
  u64 psi_ = 0;
  u64 psi_inv_ = 0;
  u64 n_inv_ = 0;
  std::shared_ptr<const TwiddleTable> twiddles_;
};

inline u64 mod_add(u64 a, u64 b, const Modulus& m) noexcept {
  const u64 s = a + b;
  return s >= m.value() ? s - m.value() : s;
}

inline u64 mod_sub(u64 a, u64 b, const Modulus& m) noexcept {
  return a >= b ? a - b : a + m.value() - b;
}

inline u64 mod_neg(u64 a, const Modulus& m) noexcept { return a == 0 ? 0 : m.value() - a; }

inline u64 mod_mul(u64 a, u64 b, const Modulus& m) noexcept {
  return m.reduce(static_cast<u128>(a) * b);
}

u64 mod_pow(u64 base, u64 exp, const Modulus& m);
u64 mod_inv(u64 a, const Modulus& m);

/// Maps a signed integer into [0, q).
inline u64 mod_from_signed(std::int64_t v, const Modulus& m) noexcept {
  if (v >= 0) return m.reduce(static_cast<u64>(v));
  const u64 r = m.reduce(static_cast<u64>(-(v + 1)) + 1);
  return mod_neg(r, m);
}

/// Maps a signed 128-bit integer into [0, q).
u64 mod_from_i128(__int128 v, const Modulus& m) noexcept;

/// Centered representative in (-q/2, q/2].
inline std::int64_t mod_centered(u64 r, const Modulus& m) noexcept {
  return r > m.value() / 2 ? static_cast<std::int64_t>(r) - static_cast<std::int64_t>(m.value())
                           : static_cast<std::int64_t>(r);
}

/// Multiplication by a fixed operand with a precomputed Shoup quotient.
struct ShoupConstant {
  u64 value = 0;
  u64 quotient = 0;  // floor(value * 2^64 / q)

  ShoupConstant() = default;
  ShoupConstant(u64 w, const Modulus& m)
      : value(w), quotient(static_cast<u64>((static_cast<u128>(w) << 64) / m.value())) {}
};

inline u64 mul_shoup(u64 x, const ShoupConstant& w, u64 q) noexcept {
  const u64 hi = static_cast<u64>((static_cast<u128>(x) * w.quotient) >> 64);
  u64 r = x * w.value - hi * q;
  return r >= q ? r - q : r;
}

bool is_prime(u64 n);

/// NTT-friendly primes q = 2^bits + 1 + k*2N found by upward search from
/// 2^bits, skipping any value listed in `exclude`.
std::vector<u64> generate_ntt_primes(unsigned bits, std::size_t count, std::size_t n,
                                     const std::vector<u64>& exclude = {});

/// Precomputed powers of psi (forward) and psi^-1 (inverse) in bit-reversed
/// order, plus N^-1. Entry k of the forward table is psi^{bitrev(k)}.
class TwiddleTable {
 public:
  TwiddleTable(const Modulus& m, u64 psi, std::size_t n);

  std::size_t degree() const noexcept { return n_; }
  u64 modulus() const noexcept { return q_; }
  const ShoupConstant& forward(std::size_t k) const noexcept { return fwd_[k]; }
  const ShoupConstant& inverse(std::size_t k) const noexcept { return inv_[k]; }
  const ShoupConstant& n_inv() const noexcept { return n_inv_; }

 private:
  std::size_t n_;
  u64 q_;
  std::vector<ShoupConstant> fwd_;
  std::vector<ShoupConstant> inv_;
  ShoupConstant n_inv_;
};

}  // namespace fhesw
