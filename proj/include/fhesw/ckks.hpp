#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "fhesw/rng.hpp"
#include "fhesw/rns_poly.hpp"

namespace fhesw {

using Complex = std::complex<double>;

struct CkksParams {
  std::string name;
  std::size_t n = 0;      // ring degree n_ckks
  std::size_t slots = 0;  // default n_slot
  double scale = 0;       // Delta
  std::vector<unsigned> prime_bits;  // ciphertext primes q_0 .. q_{L-1}
  unsigned special_bits = 0;         // key-switching prime P

  /// "desk", "switch-desk" or "paper".
  static CkksParams preset(std::string_view name);
};

struct CkksPlaintext {
  RnsPoly poly;  // Coeff domain
  double scale = 1;
  std::size_t slots = 0;

  std::size_t level() const noexcept { return poly.level(); }
};

/// Decrypts as b - a*s.
struct CkksCiphertext {
  RnsPoly b;
  RnsPoly a;
  double scale = 1;
  std::size_t slots = 0;

  std::size_t level() const noexcept { return b.level(); }
};

struct CkksSecretKey {
  std::vector<std::int64_t> coeffs;  // ternary
  RnsPoly eval;                      // over every prime including P
};

/// One row per ciphertext prime; row i holds (B_i, A_i) in Eval form over
/// q_0..q_{L-1}, P with B_i - A_i*s = e_i + P*[i-th CRT idempotent]*s'.
struct KeySwitchKey {
  std::vector<RnsPoly> b;
  std::vector<RnsPoly> a;
};

struct GaloisKeys {
  std::map<std::size_t, KeySwitchKey> by_step;  // step normalized to [0, N/2)
};

/// Parameters, encoder, key generation and evaluator.
class CkksContext {
 public:
  explicit CkksContext(CkksParams params);

  const CkksParams& params() const noexcept { return params_; }
  std::size_t degree() const noexcept { return params_.n; }
  std::size_t max_level() const noexcept { return params_.prime_bits.size(); }
  const RnsBasis& basis() const noexcept { return basis_; }
  RnsBasis basis_at(std::size_t level) const { return full_.at_level(level); }
  const Modulus& prime(std::size_t i) const noexcept { return full_[i]; }
  const Modulus& special() const noexcept { return full_[max_level()]; }

  /// Galois element 5^k mod 2N for a left rotation by k.
  std::size_t galois_element(std::int64_t step) const;
  std::size_t normalize_step(std::int64_t step) const;

  CkksPlaintext encode(const std::vector<Complex>& values, double scale, std::size_t level) const;
  CkksPlaintext encode(const std::vector<double>& values, double scale, std::size_t level) const;
  /// Default scale and top level; requires exactly n_slot values.
  CkksPlaintext encode(const std::vector<Complex>& values) const;
  std::vector<Complex> decode(const CkksPlaintext& pt) const;

  /// Centered coefficients recovered from the leading primes; exact when every
  /// coefficient is below half the product of the primes used (< 2^125).
  std::vector<double> coefficients(const RnsPoly& p) const;

  CkksSecretKey keygen(Rng& rng) const;
  KeySwitchKey relin_keygen(const CkksSecretKey& sk, Rng& rng) const;
  GaloisKeys galois_keygen(const CkksSecretKey& sk, const std::vector<std::int64_t>& steps,
                           Rng& rng) const;
  /// Key from s' to s where s' is given by its coefficients.
  KeySwitchKey switch_keygen(const std::vector<std::int64_t>& from, const CkksSecretKey& sk,
                             Rng& rng) const;

  CkksCiphertext encrypt(const CkksPlaintext& pt, const CkksSecretKey& sk, Rng& rng) const;
  CkksPlaintext decrypt(const CkksCiphertext& ct, const CkksSecretKey& sk) const;
  CkksCiphertext encrypt_zero(std::size_t level, double scale, std::size_t slots,
                              const CkksSecretKey& sk, Rng& rng) const;

  CkksCiphertext hadd(const CkksCiphertext& x, const CkksCiphertext& y) const;
  CkksCiphertext hsub(const CkksCiphertext& x, const CkksCiphertext& y) const;
  CkksCiphertext padd(const CkksCiphertext& x, const CkksPlaintext& p) const;
  CkksCiphertext pmul(const CkksCiphertext& x, const CkksPlaintext& p) const;
  CkksCiphertext hmul(const CkksCiphertext& x, const CkksCiphertext& y,
                      const KeySwitchKey& relin) const;
  CkksCiphertext rescale(const CkksCiphertext& x) const;
  CkksCiphertext hrot(const CkksCiphertext& x, std::int64_t step, const GaloisKeys& keys) const;
  /// Keeps the first `level` primes without dividing.
  CkksCiphertext mod_drop(const CkksCiphertext& x, std::size_t level) const;

  /// (B, A) with B - A*s close to d*s', for the key switching key of s'.
  std::pair<RnsPoly, RnsPoly> key_switch(const RnsPoly& d, const KeySwitchKey& key) const;

  bool same_scale(double x, double y) const noexcept;

 private:
  RnsPoly sample_uniform(const RnsBasis& basis, Rng& rng) const;
  RnsPoly sample_error(const RnsBasis& basis, Rng& rng) const;
  RnsPoly mul_by_secret(const RnsPoly& a, const CkksSecretKey& sk) const;

  CkksParams params_;
  RnsBasis full_;   // q_0 .. q_{L-1}, P
  RnsBasis basis_;  // q_0 .. q_{L-1}
  std::vector<Complex> ksi_;
  std::vector<std::size_t> rot_group_;
};

/// Ring automorphism x -> x^g; g odd. Coeff and Eval inputs are both handled.
RnsPoly automorph_galois(const RnsPoly& p, std::size_t g);
/// x -> x^(5^k mod 2N).
RnsPoly automorph(const RnsPoly& p, std::int64_t step);

CkksPlaintext automorph(const CkksPlaintext& p, std::int64_t step);

}  // namespace fhesw
