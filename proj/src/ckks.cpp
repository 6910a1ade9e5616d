#include "fhesw/ckks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fhesw/ntt.hpp"

namespace fhesw {

CkksParams CkksParams::preset(std::string_view name) {
  CkksParams p;
  p.name = std::string(name);
  if (name == "desk") {
    p.n = 8192;
    p.slots = 4096;
    p.scale = std::ldexp(1.0, 40);
    p.prime_bits = {60, 40, 40, 40, 40, 40};
    p.special_bits = 60;
  } else if (name == "switch-desk") {
    p.n = 32;
    p.slots = 8;
    p.scale = std::ldexp(1.0, 40);
    p.prime_bits = {60, 40, 40};
    p.special_bits = 60;
  } else if (name == "paper") {
    // (N, log Q, L) = (2^16, 2305, 44); named only, never instantiated in tests.
    p.n = 65536;
    p.slots = 32768;
    p.scale = std::ldexp(1.0, 51);
    p.prime_bits.assign(45, 51);
    p.prime_bits[0] = 61;
    p.special_bits = 61;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown CKKS preset '" + std::string(name) + "'");
  }
  return p;
}

namespace {

void bit_reverse_array(std::vector<Complex>& v) {
  const unsigned bits = log2_exact(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t j = bit_reverse(i, bits);
    if (i < j) std::swap(v[i], v[j]);
  }
}

// Evaluation at the roots zeta^(5^k), k < n, of a length-2n sparse packing.
void fft_special(std::vector<Complex>& v, const std::vector<Complex>& ksi,
                 const std::vector<std::size_t>& rot, std::size_t m) {
  const std::size_t size = v.size();
  bit_reverse_array(v);
  for (std::size_t len = 2; len <= size; len <<= 1) {
    const std::size_t lenh = len >> 1;
    const std::size_t lenq = len << 2;
    const std::size_t gap = m / lenq;
    for (std::size_t i = 0; i < size; i += len) {
      for (std::size_t j = 0; j < lenh; ++j) {
        const std::size_t idx = (rot[j] % lenq) * gap;
        const Complex u = v[i + j];
        const Complex w = v[i + j + lenh] * ksi[idx];
        v[i + j] = u + w;
        v[i + j + lenh] = u - w;
      }
    }
  }
}

void fft_special_inv(std::vector<Complex>& v, const std::vector<Complex>& ksi,
                     const std::vector<std::size_t>& rot, std::size_t m) {
  const std::size_t size = v.size();
  for (std::size_t len = size; len >= 2; len >>= 1) {
    const std::size_t lenh = len >> 1;
    const std::size_t lenq = len << 2;
    const std::size_t gap = m / lenq;
    for (std::size_t i = 0; i < size; i += len) {
      for (std::size_t j = 0; j < lenh; ++j) {
        const std::size_t idx = (lenq - (rot[j] % lenq)) * gap;
        const Complex u = v[i + j] + v[i + j + lenh];
        const Complex w = (v[i + j] - v[i + j + lenh]) * ksi[idx];
        v[i + j] = u;
        v[i + j + lenh] = w;
      }
    }
  }
  bit_reverse_array(v);
  for (auto& x : v) x /= static_cast<double>(size);
}

__int128 round_to_int(double x) {
  if (!std::isfinite(x) || std::fabs(x) >= std::ldexp(1.0, 125)) {
    throw Error(ErrorCode::InvalidArgument, "encoded coefficient out of range");
  }
  return static_cast<__int128>(std::round(x));
}

std::vector<std::int64_t> automorph_signed(const std::vector<std::int64_t>& c, std::size_t g) {
  const std::size_t n = c.size();
  std::vector<std::int64_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t e = (i * g) % (2 * n);
    if (e < n) {
      out[e] = c[i];
    } else {
      out[e - n] = -c[i];
    }
  }
  return out;
}

}  // namespace

CkksContext::CkksContext(CkksParams params) : params_(std::move(params)) {
  const std::size_t n = params_.n;
  if (!is_pow2(n) || n < 4) throw Error(ErrorCode::InvalidArgument, "ring degree must be a power of two");
  if (!is_pow2(params_.slots) || params_.slots > n / 2) {
    throw Error(ErrorCode::SlotCountMismatch, "n_slot must be a power of two <= N/2");
  }
  if (params_.prime_bits.empty()) throw Error(ErrorCode::InvalidArgument, "no ciphertext primes");

  std::vector<unsigned> all_bits = params_.prime_bits;
  all_bits.push_back(params_.special_bits);
  std::map<unsigned, std::vector<u64>> pool;
  std::vector<u64> used;
  for (unsigned b : all_bits) {
    if (pool.count(b)) continue;
    const auto count = static_cast<std::size_t>(std::count(all_bits.begin(), all_bits.end(), b));
    pool[b] = generate_ntt_primes(b, count, n, used);
    used.insert(used.end(), pool[b].begin(), pool[b].end());
  }
  std::map<unsigned, std::size_t> taken;
  std::vector<Modulus> ms;
  for (unsigned b : all_bits) ms.emplace_back(pool[b][taken[b]++], n);
  full_ = RnsBasis(std::move(ms));
  basis_ = full_.at_level(max_level());
  for (std::size_t i = 0; i < max_level(); ++i) {
    if (params_.scale >= static_cast<double>(full_[i].value())) {
      throw Error(ErrorCode::InvalidArgument, "scale must stay below every prime");
    }
  }

  const std::size_t m = 2 * n;
  ksi_.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
    ksi_[j] = {std::cos(angle), std::sin(angle)};
  }
  rot_group_.resize(n / 2);
  std::size_t five = 1;
  for (std::size_t j = 0; j < n / 2; ++j) {
    rot_group_[j] = five;
    five = (five * 5) % m;
  }
}

std::size_t CkksContext::normalize_step(std::int64_t step) const {
  const auto half = static_cast<std::int64_t>(params_.n / 2);
  return static_cast<std::size_t>(((step % half) + half) % half);
}

std::size_t CkksContext::galois_element(std::int64_t step) const {
  return rot_group_[normalize_step(step)];
}

bool CkksContext::same_scale(double x, double y) const noexcept {
  return std::fabs(x - y) <= std::ldexp(std::max(std::fabs(x), std::fabs(y)), -16);
}

CkksPlaintext CkksContext::encode(const std::vector<Complex>& values, double scale,
                                  std::size_t level) const {
  const std::size_t slots = values.size();
  if (!is_pow2(slots) || slots > params_.n / 2) {
    throw Error(ErrorCode::SlotCountMismatch, "slot count " + std::to_string(slots));
  }
  std::vector<Complex> v = values;
  fft_special_inv(v, ksi_, rot_group_, 2 * params_.n);
  const std::size_t gap = params_.n / (2 * slots);
  const std::size_t half = params_.n / 2;
  RnsPoly p(params_.n, basis_at(level));
  for (std::size_t j = 0; j < slots; ++j) {
    const __int128 re = round_to_int(v[j].real() * scale);
    const __int128 im = round_to_int(v[j].imag() * scale);
    for (std::size_t i = 0; i < level; ++i) {
      p.at(i, j * gap) = mod_from_i128(re, p.basis()[i]);
      p.at(i, j * gap + half) = mod_from_i128(im, p.basis()[i]);
    }
  }
  return {std::move(p), scale, slots};
}

CkksPlaintext CkksContext::encode(const std::vector<Complex>& values) const {
  if (values.size() != params_.slots) {
    throw Error(ErrorCode::SlotCountMismatch, std::to_string(values.size()) + " values for " +
                                                  std::to_string(params_.slots) + " slots");
  }
  return encode(values, params_.scale, max_level());
}

CkksPlaintext CkksContext::encode(const std::vector<double>& values, double scale,
                                  std::size_t level) const {
  return encode(std::vector<Complex>(values.begin(), values.end()), scale, level);
}

std::vector<double> CkksContext::coefficients(const RnsPoly& p) const {
  if (p.domain() != Domain::Coeff) throw Error(ErrorCode::DomainMismatch, "decode needs Coeff");
  std::size_t used = 0;
  unsigned bits = 0;
  while (used < p.level() && bits + p.basis()[used].bit_count() <= 125) {
    bits += p.basis()[used].bit_count();
    ++used;
  }
  u128 Q = 1;
  for (std::size_t i = 0; i < used; ++i) Q *= p.basis()[i].value();
  std::vector<u128> qhat(used);
  std::vector<u64> qhat_inv(used);
  for (std::size_t i = 0; i < used; ++i) {
    const Modulus& qi = p.basis()[i];
    qhat[i] = Q / qi.value();
    qhat_inv[i] = mod_inv(static_cast<u64>(qhat[i] % qi.value()), qi);
  }
  std::vector<double> out(p.degree());
  for (std::size_t j = 0; j < p.degree(); ++j) {
    u128 x = 0;
    for (std::size_t i = 0; i < used; ++i) {
      const u64 y = mod_mul(p.at(i, j), qhat_inv[i], p.basis()[i]);
      x += static_cast<u128>(y) * qhat[i];
      if (x >= Q) x %= Q;
    }
    out[j] = x > Q / 2 ? -static_cast<double>(Q - x) : static_cast<double>(x);
  }
  return out;
}

std::vector<Complex> CkksContext::decode(const CkksPlaintext& pt) const {
  const auto c = coefficients(pt.poly);
  const std::size_t gap = params_.n / (2 * pt.slots);
  std::vector<Complex> v(pt.slots);
  for (std::size_t j = 0; j < pt.slots; ++j) {
    v[j] = {c[j * gap] / pt.scale, c[j * gap + params_.n / 2] / pt.scale};
  }
  fft_special(v, ksi_, rot_group_, 2 * params_.n);
  return v;
}

RnsPoly CkksContext::sample_uniform(const RnsBasis& basis, Rng& rng) const {
  RnsPoly p(params_.n, basis);
  for (std::size_t i = 0; i < basis.level(); ++i) {
    for (auto& x : p.residues(i)) x = rng.uniform(basis[i].value());
  }
  return p;
}

RnsPoly CkksContext::sample_error(const RnsBasis& basis, Rng& rng) const {
  std::vector<std::int64_t> e(params_.n);
  for (auto& x : e) x = rng.gaussian();
  return RnsPoly::from_signed(basis, e);
}

CkksSecretKey CkksContext::keygen(Rng& rng) const {
  CkksSecretKey sk;
  sk.coeffs = rng.ternary_vector(params_.n);
  sk.eval = RnsPoly::from_signed(full_, sk.coeffs, Domain::Eval);
  return sk;
}

namespace {

KeySwitchKey make_switch_key(const CkksContext& ctx, const RnsBasis& full, const RnsPoly& target_eval,
                             const CkksSecretKey& sk, Rng& rng) {
  const std::size_t L = ctx.max_level();
  const Modulus& P = ctx.special();
  KeySwitchKey key;
  for (std::size_t i = 0; i < L; ++i) {
    RnsPoly a(ctx.degree(), full, Domain::Eval);
    for (std::size_t t = 0; t <= L; ++t) {
      for (auto& x : a.residues(t)) x = rng.uniform(full[t].value());
    }
    std::vector<std::int64_t> e(ctx.degree());
    for (auto& x : e) x = rng.gaussian();
    RnsPoly b = poly_add(poly_pointwise_mul(a, sk.eval), RnsPoly::from_signed(full, e, Domain::Eval));
    const Modulus& qi = full[i];
    const ShoupConstant p_mod(qi.reduce(P.value()), qi);
    auto bi = b.residues(i);
    auto si = target_eval.residues(i);
    for (std::size_t j = 0; j < ctx.degree(); ++j) {
      bi[j] = mod_add(bi[j], mul_shoup(si[j], p_mod, qi.value()), qi);
    }
    key.b.push_back(std::move(b));
    key.a.push_back(std::move(a));
  }
  return key;
}

}  // namespace

KeySwitchKey CkksContext::switch_keygen(const std::vector<std::int64_t>& from,
                                        const CkksSecretKey& sk, Rng& rng) const {
  if (from.size() != params_.n) throw Error(ErrorCode::KeyLengthMismatch, "source key length");
  return make_switch_key(*this, full_, RnsPoly::from_signed(full_, from, Domain::Eval), sk, rng);
}

KeySwitchKey CkksContext::relin_keygen(const CkksSecretKey& sk, Rng& rng) const {
  return make_switch_key(*this, full_, poly_pointwise_mul(sk.eval, sk.eval), sk, rng);
}

GaloisKeys CkksContext::galois_keygen(const CkksSecretKey& sk,
                                      const std::vector<std::int64_t>& steps, Rng& rng) const {
  GaloisKeys keys;
  for (std::int64_t s : steps) {
    const std::size_t k = normalize_step(s);
    if (keys.by_step.count(k)) continue;
    keys.by_step.emplace(k, switch_keygen(automorph_signed(sk.coeffs, rot_group_[k]), sk, rng));
  }
  return keys;
}

RnsPoly CkksContext::mul_by_secret(const RnsPoly& a, const CkksSecretKey& sk) const {
  return to_coeff(poly_pointwise_mul(to_eval(a), sk.eval.truncated(a.level())));
}

CkksCiphertext CkksContext::encrypt(const CkksPlaintext& pt, const CkksSecretKey& sk,
                                    Rng& rng) const {
  const RnsBasis basis = basis_at(pt.level());
  RnsPoly a = sample_uniform(basis, rng);
  RnsPoly b = mul_by_secret(a, sk);
  poly_add_inplace(b, pt.poly);
  poly_add_inplace(b, sample_error(basis, rng));
  return {std::move(b), std::move(a), pt.scale, pt.slots};
}

CkksCiphertext CkksContext::encrypt_zero(std::size_t level, double scale, std::size_t slots,
                                         const CkksSecretKey& sk, Rng& rng) const {
  return encrypt({RnsPoly(params_.n, basis_at(level)), scale, slots}, sk, rng);
}

CkksPlaintext CkksContext::decrypt(const CkksCiphertext& ct, const CkksSecretKey& sk) const {
  return {poly_sub(ct.b, mul_by_secret(ct.a, sk)), ct.scale, ct.slots};
}

namespace {

void check_level(std::size_t x, std::size_t y) {
  if (x != y) {
    throw Error(ErrorCode::LevelMismatch, "levels " + std::to_string(x) + " and " + std::to_string(y));
  }
}

}  // namespace

CkksCiphertext CkksContext::hadd(const CkksCiphertext& x, const CkksCiphertext& y) const {
  check_level(x.level(), y.level());
  if (!same_scale(x.scale, y.scale)) throw Error(ErrorCode::ScaleMismatch, "hadd scales differ");
  return {poly_add(x.b, y.b), poly_add(x.a, y.a), x.scale, x.slots};
}

CkksCiphertext CkksContext::hsub(const CkksCiphertext& x, const CkksCiphertext& y) const {
  check_level(x.level(), y.level());
  if (!same_scale(x.scale, y.scale)) throw Error(ErrorCode::ScaleMismatch, "hsub scales differ");
  return {poly_sub(x.b, y.b), poly_sub(x.a, y.a), x.scale, x.slots};
}

CkksCiphertext CkksContext::padd(const CkksCiphertext& x, const CkksPlaintext& p) const {
  check_level(x.level(), p.level());
  if (!same_scale(x.scale, p.scale)) throw Error(ErrorCode::ScaleMismatch, "padd scales differ");
  return {poly_add(x.b, p.poly), x.a, x.scale, x.slots};
}

CkksCiphertext CkksContext::pmul(const CkksCiphertext& x, const CkksPlaintext& p) const {
  check_level(x.level(), p.level());
  const RnsPoly pe = to_eval(p.poly);
  return {to_coeff(poly_pointwise_mul(to_eval(x.b), pe)),
          to_coeff(poly_pointwise_mul(to_eval(x.a), pe)), x.scale * p.scale, x.slots};
}

CkksCiphertext CkksContext::hmul(const CkksCiphertext& x, const CkksCiphertext& y,
                                 const KeySwitchKey& relin) const {
  check_level(x.level(), y.level());
  if (x.level() < 2) throw Error(ErrorCode::InsufficientLevel, "hmul needs level >= 2");
  const RnsPoly b1 = to_eval(x.b), a1 = to_eval(x.a), b2 = to_eval(y.b), a2 = to_eval(y.a);
  RnsPoly d0 = to_coeff(poly_pointwise_mul(b1, b2));
  RnsPoly d1 = to_coeff(poly_add(poly_pointwise_mul(a1, b2), poly_pointwise_mul(a2, b1)));
  const RnsPoly d2 = to_coeff(poly_pointwise_mul(a1, a2));
  auto [B, A] = key_switch(d2, relin);
  poly_add_inplace(d0, B);
  poly_add_inplace(d1, A);
  return {std::move(d0), std::move(d1), x.scale * y.scale, x.slots};
}

CkksCiphertext CkksContext::rescale(const CkksCiphertext& x) const {
  const std::size_t level = x.level();
  if (level < 2) throw Error(ErrorCode::InsufficientLevel, "rescale needs level >= 2");
  const Modulus& ql = full_[level - 1];
  auto drop = [&](const RnsPoly& p) {
    RnsPoly out = p.truncated(level - 1);
    auto last = p.residues(level - 1);
    for (std::size_t j = 0; j + 1 < level; ++j) {
      const Modulus& qj = full_[j];
      const ShoupConstant inv(mod_inv(qj.reduce(ql.value()), qj), qj);
      auto r = out.residues(j);
      for (std::size_t c = 0; c < params_.n; ++c) {
        const u64 t = mod_from_signed(mod_centered(last[c], ql), qj);
        r[c] = mul_shoup(mod_sub(r[c], t, qj), inv, qj.value());
      }
    }
    return out;
  };
  return {drop(x.b), drop(x.a), x.scale / static_cast<double>(ql.value()), x.slots};
}

CkksCiphertext CkksContext::mod_drop(const CkksCiphertext& x, std::size_t level) const {
  if (level == 0 || level > x.level()) throw Error(ErrorCode::InsufficientLevel, "mod_drop level");
  return {x.b.truncated(level), x.a.truncated(level), x.scale, x.slots};
}

CkksCiphertext CkksContext::hrot(const CkksCiphertext& x, std::int64_t step,
                                 const GaloisKeys& keys) const {
  const std::size_t k = normalize_step(step);
  auto it = keys.by_step.find(k);
  if (it == keys.by_step.end()) {
    throw Error(ErrorCode::MissingGaloisKey, "no Galois key for step " + std::to_string(step));
  }
  const std::size_t g = rot_group_[k];
  RnsPoly b = automorph_galois(x.b, g);
  auto [B, A] = key_switch(automorph_galois(x.a, g), it->second);
  poly_sub_inplace(b, B);
  return {std::move(b), poly_neg(A), x.scale, x.slots};
}

std::pair<RnsPoly, RnsPoly> CkksContext::key_switch(const RnsPoly& d, const KeySwitchKey& key) const {
  if (d.domain() != Domain::Coeff) throw Error(ErrorCode::DomainMismatch, "key switch input");
  const std::size_t ell = d.level();
  const std::size_t L = max_level();
  const std::size_t n = params_.n;
  if (key.b.size() != L) throw Error(ErrorCode::ParamMismatch, "key switching key shape");

  auto target = [&](std::size_t p) { return p < ell ? p : L; };
  std::vector<std::vector<u64>> acc_b(ell + 1, std::vector<u64>(n, 0));
  std::vector<std::vector<u64>> acc_a(ell + 1, std::vector<u64>(n, 0));
  std::vector<std::int64_t> digit(n);
  std::vector<u64> tmp(n);
  for (std::size_t i = 0; i < ell; ++i) {
    const Modulus& qi = full_[i];
    auto di = d.residues(i);
    for (std::size_t j = 0; j < n; ++j) digit[j] = mod_centered(di[j], qi);
    for (std::size_t p = 0; p <= ell; ++p) {
      const std::size_t t = target(p);
      const Modulus& m = full_[t];
      for (std::size_t j = 0; j < n; ++j) tmp[j] = mod_from_signed(digit[j], m);
      ntt_forward_reference(tmp, m.twiddles());
      auto kb = key.b[i].residues(t);
      auto ka = key.a[i].residues(t);
      for (std::size_t j = 0; j < n; ++j) {
        acc_b[p][j] = mod_add(acc_b[p][j], mod_mul(tmp[j], kb[j], m), m);
        acc_a[p][j] = mod_add(acc_a[p][j], mod_mul(tmp[j], ka[j], m), m);
      }
    }
  }
  const Modulus& P = full_[L];
  auto mod_down = [&](std::vector<std::vector<u64>>& acc) {
    for (std::size_t p = 0; p <= ell; ++p) ntt_inverse_reference(acc[p], full_[target(p)].twiddles());
    RnsPoly out(n, basis_at(ell));
    for (std::size_t j = 0; j < ell; ++j) {
      const Modulus& qj = full_[j];
      const ShoupConstant p_inv(mod_inv(qj.reduce(P.value()), qj), qj);
      auto r = out.residues(j);
      for (std::size_t c = 0; c < n; ++c) {
        const u64 t = mod_from_signed(mod_centered(acc[ell][c], P), qj);
        r[c] = mul_shoup(mod_sub(acc[j][c], t, qj), p_inv, qj.value());
      }
    }
    return out;
  };
  return {mod_down(acc_b), mod_down(acc_a)};
}

RnsPoly automorph_galois(const RnsPoly& p, std::size_t g) {
  const std::size_t n = p.degree();
  const std::size_t m = 2 * n;
  if (g % 2 == 0 || g >= m) throw Error(ErrorCode::InvalidArgument, "Galois element must be odd and < 2N");
  RnsPoly out(n, p.basis(), p.domain());
  if (p.domain() == Domain::Coeff) {
    for (std::size_t i = 0; i < p.level(); ++i) {
      const Modulus& q = p.basis()[i];
      auto x = p.residues(i);
      auto y = out.residues(i);
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t e = (j * g) % m;
        if (e < n) {
          y[e] = x[j];
        } else {
          y[e - n] = mod_neg(x[j], q);
        }
      }
    }
  } else {
    const unsigned bits = log2_exact(n);
    std::vector<std::size_t> src(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t e = ((2 * bit_reverse(k, bits) + 1) * g) % m;
      src[k] = bit_reverse((e - 1) / 2, bits);
    }
    for (std::size_t i = 0; i < p.level(); ++i) {
      auto x = p.residues(i);
      auto y = out.residues(i);
      for (std::size_t k = 0; k < n; ++k) y[k] = x[src[k]];
    }
  }
  return out;
}

RnsPoly automorph(const RnsPoly& p, std::int64_t step) {
  const std::size_t n = p.degree();
  const auto half = static_cast<std::int64_t>(n / 2);
  const auto k = static_cast<std::size_t>(((step % half) + half) % half);
  std::size_t g = 1;
  for (std::size_t i = 0; i < k; ++i) g = (g * 5) % (2 * n);
  return automorph_galois(p, g);
}

CkksPlaintext automorph(const CkksPlaintext& p, std::int64_t step) {
  return {automorph(p.poly, step), p.scale, p.slots};
}

}  // namespace fhesw
