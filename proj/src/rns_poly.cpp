#include "fhesw/rns_poly.hpp"

#include <algorithm>

#include "fhesw/ntt.hpp"

namespace fhesw {

RnsBasis::RnsBasis(std::vector<Modulus> primes)
    : RnsBasis(std::make_shared<const std::vector<Modulus>>(std::move(primes)), 0) {
  level_ = primes_->size();
}

RnsBasis::RnsBasis(std::shared_ptr<const std::vector<Modulus>> primes, std::size_t level)
    : primes_(std::move(primes)), level_(level) {
  if (!primes_ || primes_->empty()) throw Error(ErrorCode::InvalidArgument, "empty basis");
  for (std::size_t i = 0; i < primes_->size(); ++i) {
    for (std::size_t j = i + 1; j < primes_->size(); ++j) {
      if ((*primes_)[i] == (*primes_)[j]) {
        throw Error(ErrorCode::InvalidArgument, "duplicate prime in basis");
      }
    }
  }
  if (level_ > primes_->size()) throw Error(ErrorCode::InvalidArgument, "level above capacity");
}

RnsBasis RnsBasis::at_level(std::size_t level) const {
  if (level == 0 || level > capacity()) {
    throw Error(ErrorCode::InsufficientLevel, "level " + std::to_string(level));
  }
  return RnsBasis(primes_, level);
}

std::vector<Modulus> RnsBasis::active() const {
  return {primes_->begin(), primes_->begin() + static_cast<std::ptrdiff_t>(level_)};
}

bool RnsBasis::operator==(const RnsBasis& o) const noexcept {
  if (level_ != o.level_) return false;
  if (primes_ == o.primes_) return true;
  for (std::size_t i = 0; i < level_; ++i) {
    if (!((*this)[i] == o[i])) return false;
  }
  return true;
}

RnsPoly::RnsPoly(std::size_t n, RnsBasis basis, Domain domain)
    : n_(n), basis_(std::move(basis)), domain_(domain), data_(n * basis_.level(), 0) {
  if (!is_pow2(n)) throw Error(ErrorCode::InvalidArgument, "degree must be a power of two");
  if (basis_.level() == 0) throw Error(ErrorCode::InvalidArgument, "basis has no active primes");
}

RnsPoly RnsPoly::from_signed(RnsBasis basis, std::span<const std::int64_t> coeffs,
                             Domain domain) {
  RnsPoly p(coeffs.size(), std::move(basis), Domain::Coeff);
  for (std::size_t i = 0; i < p.level(); ++i) {
    const Modulus& m = p.basis()[i];
    auto r = p.residues(i);
    for (std::size_t j = 0; j < coeffs.size(); ++j) r[j] = mod_from_signed(coeffs[j], m);
  }
  if (domain == Domain::Eval) to_eval_inplace(p);
  return p;
}

bool RnsPoly::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](u64 x) { return x == 0; });
}

bool RnsPoly::operator==(const RnsPoly& o) const noexcept {
  return n_ == o.n_ && domain_ == o.domain_ && basis_ == o.basis_ && data_ == o.data_;
}

RnsPoly RnsPoly::truncated(std::size_t level) const {
  RnsPoly out(n_, basis_.at_level(level), domain_);
  std::copy_n(data_.begin(), level * n_, out.data_.begin());
  return out;
}

namespace {

void check_compatible(const RnsPoly& a, const RnsPoly& b) {
  if (a.degree() != b.degree()) throw Error(ErrorCode::DegreeMismatch, "ring degrees differ");
  if (a.domain() != b.domain()) throw Error(ErrorCode::DomainMismatch, "operand domains differ");
  if (!(a.basis() == b.basis())) throw Error(ErrorCode::BasisMismatch, "operand bases differ");
}

template <typename Op>
RnsPoly binary_op(const RnsPoly& a, const RnsPoly& b, Op op) {
  check_compatible(a, b);
  RnsPoly out(a.degree(), a.basis(), a.domain());
  for (std::size_t i = 0; i < a.level(); ++i) {
    const Modulus& m = a.basis()[i];
    auto x = a.residues(i);
    auto y = b.residues(i);
    auto z = out.residues(i);
    for (std::size_t j = 0; j < a.degree(); ++j) z[j] = op(x[j], y[j], m);
  }
  return out;
}

}  // namespace

RnsPoly poly_add(const RnsPoly& a, const RnsPoly& b) {
  return binary_op(a, b, [](u64 x, u64 y, const Modulus& m) { return mod_add(x, y, m); });
}

RnsPoly poly_sub(const RnsPoly& a, const RnsPoly& b) {
  return binary_op(a, b, [](u64 x, u64 y, const Modulus& m) { return mod_sub(x, y, m); });
}

RnsPoly poly_pointwise_mul(const RnsPoly& a, const RnsPoly& b) {
  if (a.domain() != Domain::Eval || b.domain() != Domain::Eval) {
    throw Error(ErrorCode::DomainMismatch, "pointwise product needs Eval operands");
  }
  return binary_op(a, b, [](u64 x, u64 y, const Modulus& m) { return mod_mul(x, y, m); });
}

RnsPoly poly_neg(const RnsPoly& a) {
  RnsPoly out(a.degree(), a.basis(), a.domain());
  for (std::size_t i = 0; i < a.level(); ++i) {
    const Modulus& m = a.basis()[i];
    auto x = a.residues(i);
    auto z = out.residues(i);
    for (std::size_t j = 0; j < a.degree(); ++j) z[j] = mod_neg(x[j], m);
  }
  return out;
}

RnsPoly poly_scalar_mul(const RnsPoly& a, std::int64_t c) {
  RnsPoly out(a.degree(), a.basis(), a.domain());
  for (std::size_t i = 0; i < a.level(); ++i) {
    const Modulus& m = a.basis()[i];
    const ShoupConstant w(mod_from_signed(c, m), m);
    auto x = a.residues(i);
    auto z = out.residues(i);
    for (std::size_t j = 0; j < a.degree(); ++j) z[j] = mul_shoup(x[j], w, m.value());
  }
  return out;
}

void poly_add_inplace(RnsPoly& a, const RnsPoly& b) {
  check_compatible(a, b);
  for (std::size_t i = 0; i < a.level(); ++i) {
    const u64 q = a.basis()[i].value();
    auto x = a.residues(i);
    auto y = b.residues(i);
    for (std::size_t j = 0; j < a.degree(); ++j) x[j] = add_q(x[j], y[j], q);
  }
}

void poly_sub_inplace(RnsPoly& a, const RnsPoly& b) {
  check_compatible(a, b);
  for (std::size_t i = 0; i < a.level(); ++i) {
    const u64 q = a.basis()[i].value();
    auto x = a.residues(i);
    auto y = b.residues(i);
    for (std::size_t j = 0; j < a.degree(); ++j) x[j] = sub_q(x[j], y[j], q);
  }
}

RnsPoly schoolbook_negacyclic_mul(const RnsPoly& a, const RnsPoly& b) {
  check_compatible(a, b);
  if (a.domain() != Domain::Coeff) {
    throw Error(ErrorCode::DomainMismatch, "schoolbook product needs Coeff operands");
  }
  const std::size_t n = a.degree();
  RnsPoly out(n, a.basis(), Domain::Coeff);
  for (std::size_t p = 0; p < a.level(); ++p) {
    const Modulus& m = a.basis()[p];
    auto x = a.residues(p);
    auto y = b.residues(p);
    auto z = out.residues(p);
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const u64 t = mod_mul(x[i], y[j], m);
        const std::size_t k = i + j;
        if (k < n) {
          z[k] = mod_add(z[k], t, m);
        } else {
          z[k - n] = mod_sub(z[k - n], t, m);
        }
      }
    }
  }
  return out;
}

RnsPoly bconv(const RnsPoly& p, const RnsBasis& target) {
  if (p.domain() != Domain::Coeff) throw Error(ErrorCode::DomainMismatch, "bconv needs Coeff");
  if (target.level() == 0) throw Error(ErrorCode::BasisMismatch, "empty target basis");
  const std::size_t n = p.degree();
  const std::size_t L = p.level();
  const RnsBasis& src = p.basis();

  // y_i = x_i * (Q/q_i)^-1 mod q_i
  std::vector<u64> y(L * n);
  for (std::size_t i = 0; i < L; ++i) {
    const Modulus& qi = src[i];
    u64 qhat = 1;
    for (std::size_t k = 0; k < L; ++k) {
      if (k != i) qhat = mod_mul(qhat, qi.reduce(src[k].value()), qi);
    }
    const ShoupConstant w(mod_inv(qhat, qi), qi);
    auto x = p.residues(i);
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = mul_shoup(x[j], w, qi.value());
  }

  RnsPoly out(n, target, Domain::Coeff);
  for (std::size_t t = 0; t < target.level(); ++t) {
    const Modulus& pt = target[t];
    auto z = out.residues(t);
    for (std::size_t i = 0; i < L; ++i) {
      u64 qhat = 1;
      for (std::size_t k = 0; k < L; ++k) {
        if (k != i) qhat = mod_mul(qhat, pt.reduce(src[k].value()), pt);
      }
      const ShoupConstant w(qhat, pt);
      for (std::size_t j = 0; j < n; ++j) {
        z[j] = mod_add(z[j], mul_shoup(pt.reduce(y[i * n + j]), w, pt.value()), pt);
      }
    }
  }
  return out;
}

namespace {

const TwiddleTable& checked_twiddles(const Modulus& m, std::size_t n) {
  if (!m.has_roots() || m.degree() != n) {
    throw Error(ErrorCode::DegreeMismatch, "prime carries no roots for this degree");
  }
  return m.twiddles();
}

}  // namespace

void to_eval_inplace(RnsPoly& p) {
  if (p.domain() != Domain::Coeff) throw Error(ErrorCode::DomainMismatch, "already in Eval");
  for (std::size_t i = 0; i < p.level(); ++i) {
    ntt_forward_reference(p.residues(i), checked_twiddles(p.basis()[i], p.degree()));
  }
  p.set_domain(Domain::Eval);
}

void to_coeff_inplace(RnsPoly& p) {
  if (p.domain() != Domain::Eval) throw Error(ErrorCode::DomainMismatch, "already in Coeff");
  for (std::size_t i = 0; i < p.level(); ++i) {
    ntt_inverse_reference(p.residues(i), checked_twiddles(p.basis()[i], p.degree()));
  }
  p.set_domain(Domain::Coeff);
}

RnsPoly to_eval(RnsPoly p) {
  to_eval_inplace(p);
  return p;
}

RnsPoly to_coeff(RnsPoly p) {
  to_coeff_inplace(p);
  return p;
}

RnsPoly ntt_negacyclic_mul(const RnsPoly& a, const RnsPoly& b) {
  if (a.domain() != Domain::Coeff || b.domain() != Domain::Coeff) {
    throw Error(ErrorCode::DomainMismatch, "product operands must be in Coeff");
  }
  return to_coeff(poly_pointwise_mul(to_eval(a), to_eval(b)));
}

}  // namespace fhesw
