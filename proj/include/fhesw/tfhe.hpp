#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fhesw/modarith.hpp"
#include "fhesw/rng.hpp"

namespace fhesw {

/// Discretized torus: arithmetic mod 2^32 via unsigned wrap-around.
using Torus = std::uint32_t;

inline constexpr u64 kTorusModulus = u64{1} << 32;

inline std::int64_t torus_centered(Torus x) noexcept { return static_cast<std::int32_t>(x); }
inline Torus torus_from_signed(std::int64_t v) noexcept { return static_cast<Torus>(v); }

struct TfheParams {
  std::string name;
  std::size_t n_lwe = 0;
  std::size_t N = 0;  // RLWE degree, k = 1
  unsigned base_log = 0;       // bootstrapping gadget B_g = 2^base_log
  std::size_t levels = 0;      // l
  unsigned ks_base_log = 4;    // LWE key-switch gadget
  std::size_t ks_levels = 8;
  double sigma_lwe = 0;  // all sigmas in units of 2^-32
  double sigma_bsk = 0;
  double sigma_ks = 0;
  unsigned plain_modulus = 32;  // p; messages m * 2^32 / p, LUT domain [0, p/2)

  /// "desk", "tfhe-80", "tfhe-110", "tfhe-128" or "paper".
  static TfheParams preset(std::string_view name);

  /// Throws ConfigError when the gadgets do not cover 2^32 exactly or N is
  /// not a power of two.
  void validate() const;

  std::size_t alphabet() const noexcept { return plain_modulus / 2; }
};

/// Phase b - <a, s>.
struct LweCiphertext {
  std::vector<Torus> a;
  Torus b = 0;

  std::size_t dimension() const noexcept { return a.size(); }
  bool operator==(const LweCiphertext&) const = default;
};

struct LweKey {
  std::vector<std::int64_t> s;  // binary or ternary
};

/// Phase polynomial b - a*s in Z_{2^32}[X]/(X^N + 1).
struct TlweCiphertext {
  std::vector<Torus> b;
  std::vector<Torus> a;

  std::size_t degree() const noexcept { return b.size(); }
  bool operator==(const TlweCiphertext&) const = default;
};

struct TlweKey {
  std::vector<std::int64_t> s;  // binary coefficients
};

/// Rows 0..l-1 carry mu*B^i in the a-part, rows l..2l-1 in the b-part. Rows
/// are stored in Eval form over the auxiliary prime so the external product
/// never re-transforms key material.
struct RgswCiphertext {
  std::size_t levels = 0;
  std::vector<std::vector<u64>> b;  // 2l rows
  std::vector<std::vector<u64>> a;
};

struct BootstrapKey {
  std::vector<RgswCiphertext> rows;  // one per LWE key coefficient

  std::size_t size() const noexcept { return rows.size(); }
};

/// LWE key-switching key: row (i, j) encrypts s_in[i] * B^j under s_out.
struct LweKeySwitchKey {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  unsigned base_log = 0;
  std::size_t levels = 0;
  std::vector<Torus> a;  // n_in * levels * n_out
  std::vector<Torus> b;  // n_in * levels

  const Torus* row_a(std::size_t i, std::size_t j) const noexcept {
    return a.data() + (i * levels + j) * n_out;
  }
  Torus row_b(std::size_t i, std::size_t j) const noexcept { return b[i * levels + j]; }
};

/// Test polynomial for f: [0, p/2) -> Z_p. Coefficient j holds
/// f(j / window) * 2^32 / p with window = N / (p/2); the upper half of the
/// torus is reached through the negacyclic wrap and yields -f.
struct LookupTable {
  std::vector<std::int64_t> values;  // f over [0, p/2)
  std::vector<Torus> poly;           // N coefficients
  unsigned plain_modulus = 0;
};

/// Scaled LWE over Z_{2N} after modulus switching.
struct ScaledLwe {
  std::vector<std::uint32_t> a;
  std::uint32_t b = 0;
  std::uint32_t modulus = 0;
};

/// round(a * target / q) mod target.
u64 modulus_switch_value(u64 a, u64 q, u64 target);

ScaledLwe modulus_switch(const LweCiphertext& ct, std::uint32_t target);

// ---- LWE ------------------------------------------------------------------

Torus encode_message(std::int64_t m, unsigned plain_modulus);

/// Nearest message in Z_p.
std::int64_t decode_message(Torus phase, unsigned plain_modulus);

LweKey lwe_keygen(std::size_t n, Rng& rng);
LweCiphertext lwe_encrypt(Torus mu, const LweKey& key, double sigma, Rng& rng);
LweCiphertext lwe_trivial(Torus mu, std::size_t n);
Torus lwe_phase(const LweCiphertext& ct, const LweKey& key);
std::int64_t lwe_decrypt(const LweCiphertext& ct, const LweKey& key, unsigned plain_modulus);

LweCiphertext lwe_add(const LweCiphertext& x, const LweCiphertext& y);
LweCiphertext lwe_sub(const LweCiphertext& x, const LweCiphertext& y);

LweKeySwitchKey lwe_keyswitch_keygen(const LweKey& from, const LweKey& to, unsigned base_log,
                                     std::size_t levels, double sigma, Rng& rng);

/// Throws KeyMismatch when the ciphertext is not under the key's source.
LweCiphertext lwe_key_switch(const LweCiphertext& ct, const LweKeySwitchKey& ksk);

// ---- TLWE / RGSW ----------------------------------------------------------

/// Exact product of a torus polynomial and a small integer polynomial.
std::vector<Torus> torus_poly_mul(const std::vector<Torus>& t,
                                  const std::vector<std::int64_t>& k);

/// X^k * p for k in [0, 2N).
std::vector<Torus> monomial_mul(const std::vector<Torus>& p, std::size_t k);

TlweCiphertext tlwe_trivial(std::vector<Torus> mu);
TlweCiphertext tlwe_encrypt(const std::vector<Torus>& mu, const TlweKey& key, double sigma,
                            Rng& rng);
std::vector<Torus> tlwe_phase(const TlweCiphertext& c, const TlweKey& key);
TlweCiphertext tlwe_add(const TlweCiphertext& x, const TlweCiphertext& y);
TlweCiphertext tlwe_sub(const TlweCiphertext& x, const TlweCiphertext& y);
TlweCiphertext tlwe_monomial_mul(const TlweCiphertext& c, std::size_t k);

/// Degree-N workspace for the auxiliary NTT prime used by external products.
class TfheEngine {
 public:
  TfheEngine(std::size_t N, unsigned base_log, std::size_t levels);

  std::size_t degree() const noexcept { return n_; }
  unsigned base_log() const noexcept { return base_log_; }
  std::size_t levels() const noexcept { return levels_; }
  const Modulus& prime() const noexcept { return p_; }

  RgswCiphertext rgsw_encrypt(std::int64_t bit, const TlweKey& key, double sigma, Rng& rng) const;

  /// Decompose -> NTT -> MAC -> INTT. Throws ParamMismatch on mismatched
  /// degree or gadget.
  TlweCiphertext external_product(const TlweCiphertext& c, const RgswCiphertext& g) const;

  /// One gadget applied to every ciphertext of a batch: each key row is
  /// read once per gate. Bit-identical to calling external_product in turn.
  std::vector<TlweCiphertext> external_product_batch(const std::vector<TlweCiphertext>& cs,
                                                     const RgswCiphertext& g) const;

  /// d0 + external_product(d1 - d0, g).
  TlweCiphertext cmux(const RgswCiphertext& g, const TlweCiphertext& d1,
                      const TlweCiphertext& d0) const;

  BootstrapKey bootstrap_keygen(const LweKey& lwe, const TlweKey& tlwe, double sigma,
                                Rng& rng) const;

  /// acc <- CMux(bsk_i, X^{a_i} acc, acc) for each i; the caller seeds acc
  /// with X^{-b} * testpoly. Throws KeyLengthMismatch.
  TlweCiphertext blind_rotate(TlweCiphertext acc, const ScaledLwe& scaled,
                              const BootstrapKey& bsk) const;

  /// Runs the same rotation on every accumulator, one batched CMux per key
  /// row.
  std::vector<TlweCiphertext> blind_rotate_batch(std::vector<TlweCiphertext> accs,
                                                 const std::vector<ScaledLwe>& scaled,
                                                 const BootstrapKey& bsk) const;

  std::vector<u64> to_eval(const std::vector<std::int64_t>& small) const;
  std::vector<u64> to_eval(const std::vector<Torus>& t) const;
  std::vector<Torus> from_eval(std::vector<u64> v) const;

 private:
  void decompose_into(const std::vector<Torus>& poly, std::vector<std::vector<u64>>& digits,
                      std::size_t offset) const;
  TlweCiphertext mac(const std::vector<std::vector<u64>>& digits,
                     const RgswCiphertext& g) const;
  void check(const TlweCiphertext& c, const RgswCiphertext& g) const;

  std::size_t n_;
  unsigned base_log_;
  std::size_t levels_;
  Modulus p_;
};

/// LWE sample of coefficient `index` of c's phase, under the key made of
/// the RLWE secret's coefficients. Throws IndexOutOfRange.
LweCiphertext sample_extract(const TlweCiphertext& c, std::size_t index = 0);

LweKey extracted_key(const TlweKey& key);

LookupTable make_lut(std::size_t N, unsigned plain_modulus,
                     const std::function<std::int64_t(std::int64_t)>& f);
LookupTable identity_lut(std::size_t N, unsigned plain_modulus);
/// +1 on [0, p/2); the wrap yields -1 for negative inputs.
LookupTable sign_lut(std::size_t N, unsigned plain_modulus);

/// Offset by half a window, then modulus switch and build X^{-b} * testpoly.
ScaledLwe bootstrap_prepare(const LweCiphertext& ct, const LookupTable& lut, std::size_t N);
TlweCiphertext initial_accumulator(const LookupTable& lut, const ScaledLwe& scaled);

struct TfheKeys {
  LweKey lwe;
  TlweKey tlwe;
  BootstrapKey bsk;
  LweKeySwitchKey ksk;  // extracted TLWE key -> lwe
};

/// Keys and engine for one parameter set.
class TfheContext {
 public:
  explicit TfheContext(TfheParams params);

  const TfheParams& params() const noexcept { return params_; }
  const TfheEngine& engine() const noexcept { return engine_; }

  TfheKeys keygen(Rng& rng) const;

  LweCiphertext encrypt(std::int64_t m, const LweKey& key, Rng& rng) const;
  std::int64_t decrypt(const LweCiphertext& ct, const LweKey& key) const;

  LookupTable identity_lut() const;
  LookupTable sign_lut() const;

  /// modulus_switch -> blind_rotate -> sample_extract -> lwe_key_switch.
  LweCiphertext programmable_bootstrap(const LweCiphertext& ct, const LookupTable& lut,
                                       const BootstrapKey& bsk,
                                       const LweKeySwitchKey& ksk) const;

 private:
  TfheParams params_;
  TfheEngine engine_;
};

}  // namespace fhesw
