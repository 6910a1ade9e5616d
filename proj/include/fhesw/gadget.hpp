#pragma once

#include <vector>

#include "fhesw/rns_poly.hpp"

namespace fhesw {

/// Signed-digit decomposition in base 2^base_log with `levels` digits.
/// Scale factor of level i is B^i.
class Gadget {
 public:
  Gadget(unsigned base_log, std::size_t levels, u64 modulus);

  unsigned base_log() const noexcept { return base_log_; }
  u64 base() const noexcept { return u64{1} << base_log_; }
  std::size_t levels() const noexcept { return levels_; }
  u64 modulus() const noexcept { return q_; }
  const std::vector<u64>& scales() const noexcept { return scales_; }

  /// Digits of a centered value |x| <= q/2. Every digit but the last lies in
  /// [-B/2, B/2); the last one in [-B/2, B/2].
  std::vector<std::int64_t> decompose(std::int64_t centered) const;

 private:
  unsigned base_log_;
  std::size_t levels_;
  u64 q_;
  std::vector<u64> scales_;
};

/// Per-coefficient decomposition of a single-prime polynomial.
std::vector<RnsPoly> gadget_decompose(const RnsPoly& p, const Gadget& g);

/// Sum of digit_i * scale_i, reduced into the polynomial's modulus.
RnsPoly gadget_recompose(const std::vector<RnsPoly>& digits, const Gadget& g);

}  // namespace fhesw
