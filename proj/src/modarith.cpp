#include "fhesw/modarith.hpp"

#include <algorithm>
#include <string>

namespace fhesw {

namespace {

u64 mulmod_u128(u64 a, u64 b, u64 m) { return static_cast<u64>((static_cast<u128>(a) * b) % m); }

u64 powmod_u128(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1) result = mulmod_u128(result, base, m);
    base = mulmod_u128(base, base, m);
    exp >>= 1;
  }
  return result;
}

}  // namespace

Modulus::Modulus(u64 q) : q_(q) {
  if (q < 2 || q >= (u64{1} << kMaxBits)) {
    throw Error(ErrorCode::InvalidArgument, "modulus out of range: " + std::to_string(q));
  }
  bits_ = 64 - static_cast<unsigned>(__builtin_clzll(q));
  const u128 ratio = ~static_cast<u128>(0) / q;
  ratio_hi_ = static_cast<u64>(ratio >> 64);
  ratio_lo_ = static_cast<u64>(ratio);
}

Modulus::Modulus(u64 q, std::size_t n) : Modulus(q) {
  if (!is_pow2(n)) {
    throw Error(ErrorCode::InvalidArgument, "ring degree must be a power of two");
  }
  const u64 two_n = 2 * static_cast<u64>(n);
  if ((q - 1) % two_n != 0 || !is_prime(q)) {
    throw Error(ErrorCode::InvalidArgument,
                "modulus " + std::to_string(q) + " is not an NTT-friendly prime for N=" +
                    std::to_string(n));
  }
  n_ = n;
  // A 2N-th root of unity y is primitive iff y^N = -1 since 2N is a power of two.
  const u64 cofactor = (q - 1) / two_n;
  for (u64 x = 2; x < q; ++x) {
    const u64 y = mod_pow(x, cofactor, *this);
    if (mod_pow(y, n, *this) == q - 1) {
      psi_ = y;
      break;
    }
  }
  psi_inv_ = mod_inv(psi_, *this);
  n_inv_ = mod_inv(static_cast<u64>(n) % q, *this);
  twiddles_ = std::make_shared<const TwiddleTable>(*this, psi_, n);
}

const TwiddleTable& Modulus::twiddles() const {
  if (!twiddles_) {
    throw Error(ErrorCode::InvalidArgument, "modulus has no twiddle table");
  }
  return *twiddles_;
}

u64 mod_pow(u64 base, u64 exp, const Modulus& m) {
  u64 result = 1 % m.value();
  base = m.reduce(base);
  while (exp != 0) {
    if (exp & 1) result = mod_mul(result, base, m);
    base = mod_mul(base, base, m);
    exp >>= 1;
  }
  return result;
}

u64 mod_inv(u64 a, const Modulus& m) {
  // Extended Euclid over signed 128-bit to stay exact for 62-bit moduli.
  __int128 t = 0, new_t = 1;
  __int128 r = m.value(), new_r = m.reduce(a);
  if (new_r == 0) throw Error(ErrorCode::InvalidArgument, "zero has no inverse");
  while (new_r != 0) {
    const __int128 quot = r / new_r;
    const __int128 tt = t - quot * new_t;
    t = new_t;
    new_t = tt;
    const __int128 rr = r - quot * new_r;
    r = new_r;
    new_r = rr;
  }
  if (r != 1) throw Error(ErrorCode::InvalidArgument, "value not invertible");
  if (t < 0) t += m.value();
  return static_cast<u64>(t);
}

u64 mod_from_i128(__int128 v, const Modulus& m) noexcept {
  const bool neg = v < 0;
  const u128 mag = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  // Split so that each half stays below q^2 for the Barrett reduction.
  const u64 hi = m.reduce(static_cast<u128>(static_cast<u64>(mag >> 64)));
  const u64 lo = m.reduce(static_cast<u128>(static_cast<u64>(mag)));
  const u64 two63 = m.reduce(static_cast<u128>(1) << 63);
  const u64 two64 = mod_add(two63, two63, m);
  const u64 r = mod_add(mod_mul(hi, two64, m), lo, m);
  return neg ? mod_neg(r, m) : r;
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic witness set for all 64-bit inputs.
  for (u64 a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
    a %= n;
    if (a == 0) continue;
    u64 x = powmod_u128(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mulmod_u128(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<u64> generate_ntt_primes(unsigned bits, std::size_t count, std::size_t n,
                                     const std::vector<u64>& exclude) {
  if (bits < 2 || bits > Modulus::kMaxBits - 1) {
    throw Error(ErrorCode::InvalidArgument, "prime bit size out of range");
  }
  const u64 step = 2 * static_cast<u64>(n);
  std::vector<u64> out;
  u64 candidate = (u64{1} << bits) + 1;
  while (out.size() < count) {
    if (candidate >= (u64{1} << Modulus::kMaxBits)) {
      throw Error(ErrorCode::InvalidArgument, "ran out of NTT-friendly primes");
    }
    if (is_prime(candidate) &&
        std::find(exclude.begin(), exclude.end(), candidate) == exclude.end()) {
      out.push_back(candidate);
    }
    candidate += step;
  }
  return out;
}

TwiddleTable::TwiddleTable(const Modulus& m, u64 psi, std::size_t n)
    : n_(n), q_(m.value()), fwd_(n), inv_(n) {
  const unsigned logn = log2_exact(n);
  const u64 psi_inv = mod_inv(psi, m);
  u64 power = 1;
  u64 power_inv = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(bit_reverse(i, logn));
    fwd_[k] = ShoupConstant(power, m);
    inv_[k] = ShoupConstant(power_inv, m);
    power = mod_mul(power, psi, m);
    power_inv = mod_mul(power_inv, psi_inv, m);
  }
  n_inv_ = ShoupConstant(mod_inv(static_cast<u64>(n) % q_, m), m);
}

}  // namespace fhesw
