#include "fhesw/ntt.hpp"

namespace fhesw {

void ntt_forward_reference(std::span<u64> a, const TwiddleTable& tw) {
  const std::size_t n = a.size();
  const u64 q = tw.modulus();
  std::size_t t = n;
  for (std::size_t m = 1; m < n; m <<= 1) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * t;
      const ShoupConstant& w = tw.forward(m + i);
      for (std::size_t j = j1; j < j1 + t; ++j) {
        ct_butterfly(a[j], a[j + t], w, q);
      }
    }
  }
}

void ntt_inverse_reference(std::span<u64> a, const TwiddleTable& tw) {
  const std::size_t n = a.size();
  const u64 q = tw.modulus();
  std::size_t t = 1;
  for (std::size_t m = n; m > 1; m >>= 1) {
    const std::size_t h = m >> 1;
    std::size_t j1 = 0;
    for (std::size_t i = 0; i < h; ++i) {
      const ShoupConstant& w = tw.inverse(h + i);
      for (std::size_t j = j1; j < j1 + t; ++j) {
        gs_butterfly(a[j], a[j + t], w, q);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (auto& x : a) x = mul_shoup(x, tw.n_inv(), q);
}

}  // namespace fhesw
