#pragma once

#include <span>

#include "fhesw/modarith.hpp"

namespace fhesw {

inline u64 add_q(u64 a, u64 b, u64 q) noexcept {
  const u64 s = a + b;
  return s >= q ? s - q : s;
}

inline u64 sub_q(u64 a, u64 b, u64 q) noexcept { return a >= b ? a - b : a + q - b; }

/// Cooley-Tukey butterfly: (u, v) -> (u + w v, u - w v).
inline void ct_butterfly(u64& u, u64& v, const ShoupConstant& w, u64 q) noexcept {
  const u64 t = mul_shoup(v, w, q);
  v = sub_q(u, t, q);
  u = add_q(u, t, q);
}

/// Gentleman-Sande butterfly: (u, v) -> (u + v, (u - v) w).
inline void gs_butterfly(u64& u, u64& v, const ShoupConstant& w, u64 q) noexcept {
  const u64 d = sub_q(u, v, q);
  u = add_q(u, v, q);
  v = mul_shoup(d, w, q);
}

/// Negacyclic DIT transform, natural order in, bit-reversed order out.
void ntt_forward_reference(std::span<u64> a, const TwiddleTable& tw);

/// Negacyclic DIF inverse, bit-reversed in, natural out, scaled by N^-1.
void ntt_inverse_reference(std::span<u64> a, const TwiddleTable& tw);

}  // namespace fhesw
