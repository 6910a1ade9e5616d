#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fhesw/modarith.hpp"

namespace fhesw {

enum class Domain { Coeff, Eval };

/// Ordered list of distinct primes with a count of active ones.
class RnsBasis {
 public:
  RnsBasis() = default;
  explicit RnsBasis(std::vector<Modulus> primes);
  RnsBasis(std::shared_ptr<const std::vector<Modulus>> primes, std::size_t level);

  std::size_t level() const noexcept { return level_; }
  std::size_t capacity() const noexcept { return primes_ ? primes_->size() : 0; }
  const Modulus& operator[](std::size_t i) const noexcept { return (*primes_)[i]; }
  const Modulus& last() const noexcept { return (*primes_)[level_ - 1]; }

  RnsBasis at_level(std::size_t level) const;
  std::vector<Modulus> active() const;

  /// Same active primes in the same order.
  bool operator==(const RnsBasis& o) const noexcept;

 private:
  std::shared_ptr<const std::vector<Modulus>> primes_;
  std::size_t level_ = 0;
};

/// A ring element of Z_Q[x]/(x^N + 1), one residue vector per active prime.
class RnsPoly {
 public:
  RnsPoly() = default;
  RnsPoly(std::size_t n, RnsBasis basis, Domain domain = Domain::Coeff);

  /// Lifts small signed coefficients into every residue.
  static RnsPoly from_signed(RnsBasis basis, std::span<const std::int64_t> coeffs,
                             Domain domain = Domain::Coeff);

  std::size_t degree() const noexcept { return n_; }
  const RnsBasis& basis() const noexcept { return basis_; }
  std::size_t level() const noexcept { return basis_.level(); }
  Domain domain() const noexcept { return domain_; }
  void set_domain(Domain d) noexcept { domain_ = d; }

  std::span<u64> residues(std::size_t i) noexcept { return {data_.data() + i * n_, n_}; }
  std::span<const u64> residues(std::size_t i) const noexcept {
    return {data_.data() + i * n_, n_};
  }
  u64& at(std::size_t prime, std::size_t coeff) noexcept { return data_[prime * n_ + coeff]; }
  u64 at(std::size_t prime, std::size_t coeff) const noexcept {
    return data_[prime * n_ + coeff];
  }

  bool is_zero() const noexcept;
  bool operator==(const RnsPoly& o) const noexcept;

  /// Keeps the residues of the first `level` primes.
  RnsPoly truncated(std::size_t level) const;

 private:
  std::size_t n_ = 0;
  RnsBasis basis_;
  Domain domain_ = Domain::Coeff;
  std::vector<u64> data_;
};

RnsPoly poly_add(const RnsPoly& a, const RnsPoly& b);
RnsPoly poly_sub(const RnsPoly& a, const RnsPoly& b);
RnsPoly poly_neg(const RnsPoly& a);
RnsPoly poly_pointwise_mul(const RnsPoly& a, const RnsPoly& b);
RnsPoly poly_scalar_mul(const RnsPoly& a, std::int64_t c);
void poly_add_inplace(RnsPoly& a, const RnsPoly& b);
void poly_sub_inplace(RnsPoly& a, const RnsPoly& b);

inline RnsPoly operator+(const RnsPoly& a, const RnsPoly& b) { return poly_add(a, b); }
inline RnsPoly operator-(const RnsPoly& a, const RnsPoly& b) { return poly_sub(a, b); }
inline RnsPoly operator-(const RnsPoly& a) { return poly_neg(a); }

/// O(N^2) product with x^N = -1. Reference for every transform-based route.
RnsPoly schoolbook_negacyclic_mul(const RnsPoly& a, const RnsPoly& b);

/// Fast (approximate) basis conversion. Output residues are those of
/// x + k*Q_src for some 0 <= k < level(src), where x is the value in [0, Q_src).
RnsPoly bconv(const RnsPoly& p, const RnsBasis& target);

/// Reference radix-2 transforms applied per prime; requires roots on every prime.
void to_eval_inplace(RnsPoly& p);
void to_coeff_inplace(RnsPoly& p);
RnsPoly to_eval(RnsPoly p);
RnsPoly to_coeff(RnsPoly p);

/// Negacyclic product through the transform domain; output in Coeff domain.
RnsPoly ntt_negacyclic_mul(const RnsPoly& a, const RnsPoly& b);

}  // namespace fhesw
