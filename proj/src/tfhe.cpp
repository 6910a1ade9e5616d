#include "fhesw/tfhe.hpp"

#include <cmath>
#include <memory>

#include "fhesw/common.hpp"
#include "fhesw/ntt.hpp"

namespace fhesw {

namespace {

void require_same_degree(const TlweCiphertext& x, const TlweCiphertext& y) {
  if (x.degree() != y.degree() || x.a.size() != y.a.size()) {
    throw Error(ErrorCode::ParamMismatch, "TLWE degree mismatch");
  }
}

/// Signed digits of x in base 2^base_log, least significant first. All but
/// the last digit lie in [-B/2, B/2).
inline void signed_digits(std::int64_t x, unsigned base_log, std::size_t levels,
                          std::int64_t* out) noexcept {
  const std::int64_t base = std::int64_t{1} << base_log;
  const std::int64_t half = base >> 1;
  for (std::size_t i = 0; i + 1 < levels; ++i) {
    std::int64_t d = x & (base - 1);
    if (d >= half) d -= base;
    out[i] = d;
    x = (x - d) >> base_log;
  }
  out[levels - 1] = x;
}

}  // namespace

TfheParams TfheParams::preset(std::string_view name) {
  TfheParams p;
  p.name = std::string(name);
  p.sigma_lwe = 4096;
  p.sigma_bsk = 0.5;
  p.sigma_ks = 16;
  if (name == "desk") {
    p.N = 1024, p.n_lwe = 16, p.base_log = 11, p.levels = 3;
  } else if (name == "tfhe-80") {
    p.N = 1024, p.n_lwe = 500, p.base_log = 16, p.levels = 2;
  } else if (name == "tfhe-110") {
    p.N = 1024, p.n_lwe = 630, p.base_log = 11, p.levels = 3;
  } else if (name == "tfhe-128") {
    p.N = 2048, p.n_lwe = 592, p.base_log = 11, p.levels = 3;
  } else if (name == "paper") {
    // Security-grade noise on the tfhe-110 shape; functional runs use the
    // presets above.
    p.N = 1024, p.n_lwe = 630, p.base_log = 11, p.levels = 3;
    p.sigma_lwe = std::ldexp(1.0, 17);
    p.sigma_bsk = std::ldexp(1.0, 7);
    p.sigma_ks = std::ldexp(1.0, 17);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown TFHE preset '" + std::string(name) + "'");
  }
  p.validate();
  return p;
}

void TfheParams::validate() const {
  if (!is_pow2(N) || N < 2) throw Error(ErrorCode::ConfigError, "TFHE N must be a power of two");
  if (n_lwe == 0) throw Error(ErrorCode::ConfigError, "n_lwe must be positive");
  if (base_log == 0 || levels == 0 || base_log * levels < 32) {
    throw Error(ErrorCode::ConfigError, "bootstrapping gadget does not cover 2^32");
  }
  if (ks_base_log == 0 || ks_levels == 0 || ks_base_log * ks_levels < 32) {
    throw Error(ErrorCode::ConfigError, "key-switching gadget does not cover 2^32");
  }
  if (!is_pow2(plain_modulus) || plain_modulus < 2 || plain_modulus > N) {
    throw Error(ErrorCode::ConfigError, "plain modulus must be a power of two in [2, N]");
  }
}

u64 modulus_switch_value(u64 a, u64 q, u64 target) {
  if (q == 0 || target == 0 || target > q) {
    throw Error(ErrorCode::InvalidArgument, "modulus switch needs 0 < target <= q");
  }
  const u128 num = static_cast<u128>(a % q) * target + q / 2;
  return static_cast<u64>(num / q) % target;
}

ScaledLwe modulus_switch(const LweCiphertext& ct, std::uint32_t target) {
  ScaledLwe out;
  out.modulus = target;
  out.a.resize(ct.a.size());
  for (std::size_t i = 0; i < ct.a.size(); ++i) {
    out.a[i] = static_cast<std::uint32_t>(modulus_switch_value(ct.a[i], kTorusModulus, target));
  }
  out.b = static_cast<std::uint32_t>(modulus_switch_value(ct.b, kTorusModulus, target));
  return out;
}

// ---- LWE ------------------------------------------------------------------

Torus encode_message(std::int64_t m, unsigned plain_modulus) {
  const std::int64_t p = plain_modulus;
  const std::int64_t r = ((m % p) + p) % p;
  return static_cast<Torus>(static_cast<u64>(r) * (kTorusModulus / plain_modulus));
}

std::int64_t decode_message(Torus phase, unsigned plain_modulus) {
  const u64 step = kTorusModulus / plain_modulus;
  const u64 v = (static_cast<u64>(phase) + step / 2) / step;
  return static_cast<std::int64_t>(v % plain_modulus);
}

LweKey lwe_keygen(std::size_t n, Rng& rng) { return LweKey{rng.binary_vector(n)}; }

LweCiphertext lwe_encrypt(Torus mu, const LweKey& key, double sigma, Rng& rng) {
  LweCiphertext ct;
  ct.a.resize(key.s.size());
  Torus dot = 0;
  for (std::size_t i = 0; i < key.s.size(); ++i) {
    ct.a[i] = rng.next_u32();
    dot += ct.a[i] * static_cast<Torus>(key.s[i]);
  }
  ct.b = dot + mu + torus_from_signed(rng.gaussian(sigma));
  return ct;
}

LweCiphertext lwe_trivial(Torus mu, std::size_t n) {
  return LweCiphertext{std::vector<Torus>(n, 0), mu};
}

Torus lwe_phase(const LweCiphertext& ct, const LweKey& key) {
  if (ct.a.size() != key.s.size()) throw Error(ErrorCode::KeyMismatch, "LWE key length mismatch");
  Torus dot = 0;
  for (std::size_t i = 0; i < ct.a.size(); ++i) dot += ct.a[i] * static_cast<Torus>(key.s[i]);
  return ct.b - dot;
}

std::int64_t lwe_decrypt(const LweCiphertext& ct, const LweKey& key, unsigned plain_modulus) {
  return decode_message(lwe_phase(ct, key), plain_modulus);
}

LweCiphertext lwe_add(const LweCiphertext& x, const LweCiphertext& y) {
  if (x.a.size() != y.a.size()) throw Error(ErrorCode::ParamMismatch, "LWE dimension mismatch");
  LweCiphertext out = x;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
  out.b += y.b;
  return out;
}

LweCiphertext lwe_sub(const LweCiphertext& x, const LweCiphertext& y) {
  if (x.a.size() != y.a.size()) throw Error(ErrorCode::ParamMismatch, "LWE dimension mismatch");
  LweCiphertext out = x;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] -= y.a[i];
  out.b -= y.b;
  return out;
}

LweKeySwitchKey lwe_keyswitch_keygen(const LweKey& from, const LweKey& to, unsigned base_log,
                                     std::size_t levels, double sigma, Rng& rng) {
  if (base_log == 0 || levels == 0 || base_log * levels < 32) {
    throw Error(ErrorCode::ParamMismatch, "key-switching gadget does not cover 2^32");
  }
  LweKeySwitchKey k;
  k.n_in = from.s.size();
  k.n_out = to.s.size();
  k.base_log = base_log;
  k.levels = levels;
  k.a.resize(k.n_in * levels * k.n_out);
  k.b.resize(k.n_in * levels);
  for (std::size_t i = 0; i < k.n_in; ++i) {
    for (std::size_t j = 0; j < levels; ++j) {
      const Torus mu = static_cast<Torus>(from.s[i]) * static_cast<Torus>(u64{1} << (base_log * j));
      LweCiphertext row = lwe_encrypt(mu, to, sigma, rng);
      std::copy(row.a.begin(), row.a.end(), k.a.begin() + (i * levels + j) * k.n_out);
      k.b[i * levels + j] = row.b;
    }
  }
  return k;
}

LweCiphertext lwe_key_switch(const LweCiphertext& ct, const LweKeySwitchKey& ksk) {
  if (ct.a.size() != ksk.n_in) {
    throw Error(ErrorCode::KeyMismatch, "ciphertext is not under the key-switch source key");
  }
  LweCiphertext out = lwe_trivial(ct.b, ksk.n_out);
  std::vector<std::int64_t> digits(ksk.levels);
  for (std::size_t i = 0; i < ksk.n_in; ++i) {
    signed_digits(torus_centered(ct.a[i]), ksk.base_log, ksk.levels, digits.data());
    for (std::size_t j = 0; j < ksk.levels; ++j) {
      const Torus d = torus_from_signed(digits[j]);
      if (d == 0) continue;
      const Torus* ra = ksk.row_a(i, j);
      for (std::size_t t = 0; t < ksk.n_out; ++t) out.a[t] -= d * ra[t];
      out.b -= d * ksk.row_b(i, j);
    }
  }
  return out;
}

// ---- TLWE -----------------------------------------------------------------

std::vector<Torus> monomial_mul(const std::vector<Torus>& p, std::size_t k) {
  const std::size_t n = p.size();
  k %= 2 * n;
  std::vector<Torus> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + k;
    bool neg = false;
    if (j >= 2 * n) j -= 2 * n;
    if (j >= n) j -= n, neg = true;
    out[j] = neg ? Torus{0} - p[i] : p[i];
  }
  return out;
}

TlweCiphertext tlwe_trivial(std::vector<Torus> mu) {
  const std::size_t n = mu.size();
  return TlweCiphertext{std::move(mu), std::vector<Torus>(n, 0)};
}

TlweCiphertext tlwe_add(const TlweCiphertext& x, const TlweCiphertext& y) {
  require_same_degree(x, y);
  TlweCiphertext out = x;
  for (std::size_t i = 0; i < out.b.size(); ++i) out.b[i] += y.b[i], out.a[i] += y.a[i];
  return out;
}

TlweCiphertext tlwe_sub(const TlweCiphertext& x, const TlweCiphertext& y) {
  require_same_degree(x, y);
  TlweCiphertext out = x;
  for (std::size_t i = 0; i < out.b.size(); ++i) out.b[i] -= y.b[i], out.a[i] -= y.a[i];
  return out;
}

TlweCiphertext tlwe_monomial_mul(const TlweCiphertext& c, std::size_t k) {
  return TlweCiphertext{monomial_mul(c.b, k), monomial_mul(c.a, k)};
}

namespace {

/// Shared auxiliary-prime engines keyed by degree, for the free helpers.
const TfheEngine& helper_engine(std::size_t n) {
  static thread_local std::vector<std::unique_ptr<TfheEngine>> cache;
  for (const auto& e : cache) {
    if (e->degree() == n) return *e;
  }
  cache.push_back(std::make_unique<TfheEngine>(n, 16, 2));
  return *cache.back();
}

}  // namespace

std::vector<Torus> torus_poly_mul(const std::vector<Torus>& t, const std::vector<std::int64_t>& k) {
  if (t.size() != k.size()) throw Error(ErrorCode::DegreeMismatch, "polynomial degree mismatch");
  const TfheEngine& e = helper_engine(t.size());
  std::vector<u64> x = e.to_eval(t);
  const std::vector<u64> y = e.to_eval(k);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = mod_mul(x[i], y[i], e.prime());
  return e.from_eval(std::move(x));
}

TlweCiphertext tlwe_encrypt(const std::vector<Torus>& mu, const TlweKey& key, double sigma,
                            Rng& rng) {
  if (mu.size() != key.s.size()) throw Error(ErrorCode::KeyMismatch, "TLWE key degree mismatch");
  TlweCiphertext c;
  c.a.resize(mu.size());
  for (auto& x : c.a) x = rng.next_u32();
  c.b = torus_poly_mul(c.a, key.s);
  for (std::size_t i = 0; i < mu.size(); ++i) c.b[i] += mu[i] + torus_from_signed(rng.gaussian(sigma));
  return c;
}

std::vector<Torus> tlwe_phase(const TlweCiphertext& c, const TlweKey& key) {
  if (c.degree() != key.s.size()) throw Error(ErrorCode::KeyMismatch, "TLWE key degree mismatch");
  std::vector<Torus> as = torus_poly_mul(c.a, key.s);
  for (std::size_t i = 0; i < as.size(); ++i) as[i] = c.b[i] - as[i];
  return as;
}

// ---- engine ---------------------------------------------------------------

TfheEngine::TfheEngine(std::size_t N, unsigned base_log, std::size_t levels)
    : n_(N), base_log_(base_log), levels_(levels) {
  if (!is_pow2(N)) throw Error(ErrorCode::DegreeMismatch, "TFHE degree must be a power of two");
  if (base_log == 0 || levels == 0 || base_log * levels < 32 || base_log > 31) {
    throw Error(ErrorCode::ParamMismatch, "bootstrapping gadget does not cover 2^32");
  }
  p_ = Modulus(generate_ntt_primes(Modulus::kMaxBits - 1, 1, N)[0], N);
  // Largest MAC magnitude: 2l rows * N terms * (B/2) * 2^31 must stay below p/2.
  const long double bound = 2.0L * levels * N * std::ldexp(1.0L, base_log - 1) * std::ldexp(1.0L, 31);
  if (bound >= static_cast<long double>(p_.value()) / 2) {
    throw Error(ErrorCode::ParamMismatch, "auxiliary prime too small for exact external product");
  }
}

std::vector<u64> TfheEngine::to_eval(const std::vector<std::int64_t>& small) const {
  std::vector<u64> v(small.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mod_from_signed(small[i], p_);
  ntt_forward_reference(v, p_.twiddles());
  return v;
}

std::vector<u64> TfheEngine::to_eval(const std::vector<Torus>& t) const {
  std::vector<u64> v(t.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mod_from_signed(torus_centered(t[i]), p_);
  ntt_forward_reference(v, p_.twiddles());
  return v;
}

std::vector<Torus> TfheEngine::from_eval(std::vector<u64> v) const {
  ntt_inverse_reference(v, p_.twiddles());
  std::vector<Torus> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = torus_from_signed(mod_centered(v[i], p_));
  return out;
}

RgswCiphertext TfheEngine::rgsw_encrypt(std::int64_t bit, const TlweKey& key, double sigma,
                                        Rng& rng) const {
  if (key.s.size() != n_) throw Error(ErrorCode::ParamMismatch, "RGSW key degree mismatch");
  RgswCiphertext g;
  g.levels = levels_;
  g.b.resize(2 * levels_);
  g.a.resize(2 * levels_);
  const std::vector<Torus> zero(n_, 0);
  for (std::size_t r = 0; r < 2 * levels_; ++r) {
    TlweCiphertext row = tlwe_encrypt(zero, key, sigma, rng);
    const Torus gain = static_cast<Torus>(bit) * static_cast<Torus>(u64{1} << (base_log_ * (r % levels_)));
    (r < levels_ ? row.a[0] : row.b[0]) += gain;
    g.b[r] = to_eval(row.b);
    g.a[r] = to_eval(row.a);
  }
  return g;
}

void TfheEngine::check(const TlweCiphertext& c, const RgswCiphertext& g) const {
  if (c.degree() != n_ || c.a.size() != n_) {
    throw Error(ErrorCode::ParamMismatch, "TLWE degree differs from the RGSW degree");
  }
  if (g.levels != levels_ || g.b.size() != 2 * levels_ || g.a.size() != 2 * levels_ ||
      g.b[0].size() != n_) {
    throw Error(ErrorCode::ParamMismatch, "RGSW gadget differs from the engine gadget");
  }
}

void TfheEngine::decompose_into(const std::vector<Torus>& poly,
                                std::vector<std::vector<u64>>& digits, std::size_t offset) const {
  std::int64_t d[64];
  for (std::size_t i = 0; i < n_; ++i) {
    signed_digits(torus_centered(poly[i]), base_log_, levels_, d);
    for (std::size_t k = 0; k < levels_; ++k) digits[offset + k][i] = mod_from_signed(d[k], p_);
  }
  for (std::size_t k = 0; k < levels_; ++k) ntt_forward_reference(digits[offset + k], p_.twiddles());
}

TlweCiphertext TfheEngine::mac(const std::vector<std::vector<u64>>& digits,
                               const RgswCiphertext& g) const {
  std::vector<u64> acc_b(n_, 0), acc_a(n_, 0);
  for (std::size_t r = 0; r < 2 * levels_; ++r) {
    const auto& d = digits[r];
    for (std::size_t i = 0; i < n_; ++i) {
      acc_b[i] = mod_add(acc_b[i], mod_mul(d[i], g.b[r][i], p_), p_);
      acc_a[i] = mod_add(acc_a[i], mod_mul(d[i], g.a[r][i], p_), p_);
    }
  }
  return TlweCiphertext{from_eval(std::move(acc_b)), from_eval(std::move(acc_a))};
}

TlweCiphertext TfheEngine::external_product(const TlweCiphertext& c,
                                            const RgswCiphertext& g) const {
  check(c, g);
  std::vector<std::vector<u64>> digits(2 * levels_, std::vector<u64>(n_));
  decompose_into(c.a, digits, 0);
  decompose_into(c.b, digits, levels_);
  return mac(digits, g);
}

std::vector<TlweCiphertext> TfheEngine::external_product_batch(
    const std::vector<TlweCiphertext>& cs, const RgswCiphertext& g) const {
  const std::size_t m = cs.size();
  std::vector<std::vector<std::vector<u64>>> digits(
      m, std::vector<std::vector<u64>>(2 * levels_, std::vector<u64>(n_)));
  for (std::size_t j = 0; j < m; ++j) {
    check(cs[j], g);
    decompose_into(cs[j].a, digits[j], 0);
    decompose_into(cs[j].b, digits[j], levels_);
  }
  std::vector<std::vector<u64>> acc_b(m, std::vector<u64>(n_, 0)), acc_a = acc_b;
  for (std::size_t r = 0; r < 2 * levels_; ++r) {
    const auto& kb = g.b[r];
    const auto& ka = g.a[r];
    for (std::size_t j = 0; j < m; ++j) {
      const auto& d = digits[j][r];
      for (std::size_t i = 0; i < n_; ++i) {
        acc_b[j][i] = mod_add(acc_b[j][i], mod_mul(d[i], kb[i], p_), p_);
        acc_a[j][i] = mod_add(acc_a[j][i], mod_mul(d[i], ka[i], p_), p_);
      }
    }
  }
  std::vector<TlweCiphertext> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = TlweCiphertext{from_eval(std::move(acc_b[j])), from_eval(std::move(acc_a[j]))};
  }
  return out;
}

TlweCiphertext TfheEngine::cmux(const RgswCiphertext& g, const TlweCiphertext& d1,
                                const TlweCiphertext& d0) const {
  return tlwe_add(d0, external_product(tlwe_sub(d1, d0), g));
}

BootstrapKey TfheEngine::bootstrap_keygen(const LweKey& lwe, const TlweKey& tlwe, double sigma,
                                          Rng& rng) const {
  BootstrapKey bsk;
  bsk.rows.reserve(lwe.s.size());
  for (std::int64_t s : lwe.s) bsk.rows.push_back(rgsw_encrypt(s, tlwe, sigma, rng));
  return bsk;
}

TlweCiphertext TfheEngine::blind_rotate(TlweCiphertext acc, const ScaledLwe& scaled,
                                        const BootstrapKey& bsk) const {
  if (scaled.a.size() != bsk.size()) {
    throw Error(ErrorCode::KeyLengthMismatch, "bootstrapping key length differs from LWE dimension");
  }
  if (scaled.modulus != 2 * n_) throw Error(ErrorCode::ParamMismatch, "LWE not switched to 2N");
  for (std::size_t i = 0; i < bsk.size(); ++i) {
    acc = cmux(bsk.rows[i], tlwe_monomial_mul(acc, scaled.a[i]), acc);
  }
  return acc;
}

std::vector<TlweCiphertext> TfheEngine::blind_rotate_batch(std::vector<TlweCiphertext> accs,
                                                           const std::vector<ScaledLwe>& scaled,
                                                           const BootstrapKey& bsk) const {
  if (accs.size() != scaled.size()) {
    throw Error(ErrorCode::InvalidArgument, "accumulator and input counts differ");
  }
  for (const auto& s : scaled) {
    if (s.a.size() != bsk.size()) {
      throw Error(ErrorCode::KeyLengthMismatch, "bootstrapping key length differs from LWE dimension");
    }
    if (s.modulus != 2 * n_) throw Error(ErrorCode::ParamMismatch, "LWE not switched to 2N");
  }
  std::vector<TlweCiphertext> diffs(accs.size());
  for (std::size_t i = 0; i < bsk.size(); ++i) {
    for (std::size_t j = 0; j < accs.size(); ++j) {
      diffs[j] = tlwe_sub(tlwe_monomial_mul(accs[j], scaled[j].a[i]), accs[j]);
    }
    const auto prods = external_product_batch(diffs, bsk.rows[i]);
    for (std::size_t j = 0; j < accs.size(); ++j) accs[j] = tlwe_add(accs[j], prods[j]);
  }
  return accs;
}

// ---- extraction and bootstrapping -----------------------------------------

LweCiphertext sample_extract(const TlweCiphertext& c, std::size_t index) {
  const std::size_t n = c.degree();
  if (index >= n) throw Error(ErrorCode::IndexOutOfRange, "extraction index beyond degree");
  LweCiphertext out;
  out.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.a[i] = i <= index ? c.a[index - i] : Torus{0} - c.a[n + index - i];
  }
  out.b = c.b[index];
  return out;
}

LweKey extracted_key(const TlweKey& key) { return LweKey{key.s}; }

LookupTable make_lut(std::size_t N, unsigned plain_modulus,
                     const std::function<std::int64_t(std::int64_t)>& f) {
  if (!is_pow2(plain_modulus) || plain_modulus < 2 || plain_modulus > N) {
    throw Error(ErrorCode::ParamMismatch, "plain modulus must be a power of two in [2, N]");
  }
  LookupTable lut;
  lut.plain_modulus = plain_modulus;
  const std::size_t half = plain_modulus / 2;
  const std::size_t window = N / half;
  lut.values.resize(half);
  for (std::size_t m = 0; m < half; ++m) lut.values[m] = f(static_cast<std::int64_t>(m));
  lut.poly.resize(N);
  for (std::size_t j = 0; j < N; ++j) lut.poly[j] = encode_message(lut.values[j / window], plain_modulus);
  return lut;
}

LookupTable identity_lut(std::size_t N, unsigned plain_modulus) {
  return make_lut(N, plain_modulus, [](std::int64_t m) { return m; });
}

LookupTable sign_lut(std::size_t N, unsigned plain_modulus) {
  return make_lut(N, plain_modulus, [](std::int64_t) { return std::int64_t{1}; });
}

ScaledLwe bootstrap_prepare(const LweCiphertext& ct, const LookupTable& lut, std::size_t N) {
  if (lut.poly.size() != N) throw Error(ErrorCode::ParamMismatch, "LUT degree differs from N");
  LweCiphertext shifted = ct;
  shifted.b += static_cast<Torus>(kTorusModulus / (2 * lut.plain_modulus));
  return modulus_switch(shifted, static_cast<std::uint32_t>(2 * N));
}

TlweCiphertext initial_accumulator(const LookupTable& lut, const ScaledLwe& scaled) {
  const std::size_t two_n = scaled.modulus;
  return tlwe_trivial(monomial_mul(lut.poly, (two_n - scaled.b) % two_n));
}

// ---- context --------------------------------------------------------------

TfheContext::TfheContext(TfheParams params)
    : params_((params.validate(), std::move(params))),
      engine_(params_.N, params_.base_log, params_.levels) {}

TfheKeys TfheContext::keygen(Rng& rng) const {
  TfheKeys k;
  k.lwe = lwe_keygen(params_.n_lwe, rng);
  k.tlwe = TlweKey{rng.binary_vector(params_.N)};
  k.bsk = engine_.bootstrap_keygen(k.lwe, k.tlwe, params_.sigma_bsk, rng);
  k.ksk = lwe_keyswitch_keygen(extracted_key(k.tlwe), k.lwe, params_.ks_base_log,
                               params_.ks_levels, params_.sigma_ks, rng);
  return k;
}

LweCiphertext TfheContext::encrypt(std::int64_t m, const LweKey& key, Rng& rng) const {
  return lwe_encrypt(encode_message(m, params_.plain_modulus), key, params_.sigma_lwe, rng);
}

std::int64_t TfheContext::decrypt(const LweCiphertext& ct, const LweKey& key) const {
  return lwe_decrypt(ct, key, params_.plain_modulus);
}

LookupTable TfheContext::identity_lut() const {
  return fhesw::identity_lut(params_.N, params_.plain_modulus);
}

LookupTable TfheContext::sign_lut() const { return fhesw::sign_lut(params_.N, params_.plain_modulus); }

LweCiphertext TfheContext::programmable_bootstrap(const LweCiphertext& ct, const LookupTable& lut,
                                                  const BootstrapKey& bsk,
                                                  const LweKeySwitchKey& ksk) const {
  const ScaledLwe scaled = bootstrap_prepare(ct, lut, params_.N);
  const TlweCiphertext acc = engine_.blind_rotate(initial_accumulator(lut, scaled), scaled, bsk);
  return lwe_key_switch(sample_extract(acc, 0), ksk);
}

}  // namespace fhesw
