#include "fhesw/gadget.hpp"

namespace fhesw {

Gadget::Gadget(unsigned base_log, std::size_t levels, u64 modulus)
    : base_log_(base_log), levels_(levels), q_(modulus) {
  if (base_log == 0 || base_log > 32 || levels == 0) {
    throw Error(ErrorCode::InvalidArgument, "gadget base and levels must be positive");
  }
  if (static_cast<std::size_t>(base_log) * levels < log2_exact(modulus)) {
    throw Error(ErrorCode::InvalidArgument, "gadget does not cover the modulus");
  }
  u64 s = 1;
  for (std::size_t i = 0; i < levels; ++i) {
    scales_.push_back(s);
    if (i + 1 < levels) s <<= base_log;
  }
}

std::vector<std::int64_t> Gadget::decompose(std::int64_t x) const {
  const std::int64_t B = static_cast<std::int64_t>(base());
  std::vector<std::int64_t> d(levels_);
  for (std::size_t i = 0; i + 1 < levels_; ++i) {
    std::int64_t r = x & (B - 1);
    if (r >= B / 2) r -= B;
    d[i] = r;
    x = (x - r) >> base_log_;
  }
  d[levels_ - 1] = x;
  return d;
}

std::vector<RnsPoly> gadget_decompose(const RnsPoly& p, const Gadget& g) {
  if (p.level() != 1) throw Error(ErrorCode::BasisMismatch, "gadget needs a single-prime basis");
  if (p.domain() != Domain::Coeff) throw Error(ErrorCode::DomainMismatch, "decompose needs Coeff");
  const Modulus& m = p.basis()[0];
  if (m.value() != g.modulus()) throw Error(ErrorCode::ParamMismatch, "gadget modulus differs");
  std::vector<RnsPoly> out(g.levels(), RnsPoly(p.degree(), p.basis(), Domain::Coeff));
  auto x = p.residues(0);
  for (std::size_t j = 0; j < p.degree(); ++j) {
    const auto digits = g.decompose(mod_centered(x[j], m));
    for (std::size_t i = 0; i < g.levels(); ++i) out[i].at(0, j) = mod_from_signed(digits[i], m);
  }
  return out;
}

RnsPoly gadget_recompose(const std::vector<RnsPoly>& digits, const Gadget& g) {
  if (digits.size() != g.levels()) throw Error(ErrorCode::InvalidArgument, "digit count");
  RnsPoly acc(digits[0].degree(), digits[0].basis(), digits[0].domain());
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const std::int64_t s = static_cast<std::int64_t>(g.scales()[i] % g.modulus());
    poly_add_inplace(acc, poly_scalar_mul(digits[i], s));
  }
  return acc;
}

}  // namespace fhesw
