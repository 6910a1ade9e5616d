#include <gtest/gtest.h>

#include <cmath>

#include "fhesw/tfhe.hpp"

using namespace fhesw;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvariantViolation;
}

// Wrapping schoolbook product in Z_{2^32}[X]/(X^N + 1).
std::vector<Torus> schoolbook(const std::vector<Torus>& t, const std::vector<std::int64_t>& k) {
  const std::size_t n = t.size();
  std::vector<Torus> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Torus prod = t[i] * static_cast<Torus>(k[j]);
      if (i + j < n) {
        out[i + j] += prod;
      } else {
        out[i + j - n] -= prod;
      }
    }
  }
  return out;
}

std::int64_t torus_distance(Torus x, Torus y) { return std::llabs(torus_centered(x - y)); }

class DeskTfhe : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = new TfheContext(TfheParams::preset("desk"));
    Rng rng(2024);
    keys_ = new TfheKeys(ctx_->keygen(rng));
  }
  static void TearDownTestSuite() {
    delete keys_;
    delete ctx_;
  }

  const TfheParams& params() const { return ctx_->params(); }
  const TfheEngine& engine() const { return ctx_->engine(); }

  static TfheContext* ctx_;
  static TfheKeys* keys_;
};

TfheContext* DeskTfhe::ctx_ = nullptr;
TfheKeys* DeskTfhe::keys_ = nullptr;

}  // namespace

TEST(TfheParamsTest, PresetsMatchPublishedTuples) {
  const auto p80 = TfheParams::preset("tfhe-80");
  EXPECT_EQ(p80.N, 1024u);
  EXPECT_EQ(p80.n_lwe, 500u);
  EXPECT_EQ(p80.levels, 2u);
  const auto p110 = TfheParams::preset("tfhe-110");
  EXPECT_EQ(p110.N, 1024u);
  EXPECT_EQ(p110.n_lwe, 630u);
  EXPECT_EQ(p110.levels, 3u);
  const auto p128 = TfheParams::preset("tfhe-128");
  EXPECT_EQ(p128.N, 2048u);
  EXPECT_EQ(p128.n_lwe, 592u);
  EXPECT_EQ(p128.levels, 3u);
  for (const char* name : {"desk", "tfhe-80", "tfhe-110", "tfhe-128", "paper"}) {
    const auto p = TfheParams::preset(name);
    EXPECT_GE(p.base_log * p.levels, 32u) << name;
    EXPECT_EQ((2 * p.N) & (2 * p.N - 1), 0u) << name;
  }
  EXPECT_EQ(code_of([] { TfheParams::preset("tfhe-999"); }), ErrorCode::ConfigError);
  auto bad = TfheParams::preset("desk");
  bad.levels = 2;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::ConfigError);
}

TEST(TfheModSwitch, ScalesAndRounds) {
  EXPECT_EQ(modulus_switch_value(10, 64, 32), 5u);
  EXPECT_EQ(modulus_switch_value(0, 64, 32), 0u);
  for (u64 a = 0; a < 32; ++a) EXPECT_EQ(modulus_switch_value(a, 32, 32), a);
  // Rounding to nearest with wrap: 63/64 of the way rounds up to 32 == 0.
  EXPECT_EQ(modulus_switch_value(63, 64, 32), 0u);
  EXPECT_EQ(modulus_switch_value(3, 64, 32), 2u);

  Rng rng(5);
  LweCiphertext ct{{0, 1u << 31, 0xFFFFFFFFu}, 1u << 21};
  const ScaledLwe s = modulus_switch(ct, 2048);
  EXPECT_EQ(s.a, (std::vector<std::uint32_t>{0, 1024, 0}));
  EXPECT_EQ(s.b, 1u);
  for (int t = 0; t < 1000; ++t) {
    const Torus a = rng.next_u32();
    const double exact = static_cast<double>(a) * 2048 / 4294967296.0;
    const u64 r = modulus_switch_value(a, kTorusModulus, 2048);
    const double diff = std::fabs(std::remainder(exact - static_cast<double>(r), 2048.0));
    EXPECT_LE(diff, 0.5);
  }
}

TEST(TfheLwe, EncodingRoundtrip) {
  for (std::int64_t m = -40; m < 40; ++m) {
    EXPECT_EQ(decode_message(encode_message(m, 32), 32), ((m % 32) + 32) % 32);
  }
  EXPECT_EQ(encode_message(1, 32), 1u << 27);
  EXPECT_EQ(encode_message(-1, 32), 0xF8000000u);
}

TEST(TfheLwe, EncryptDecryptAllMessages) {
  const TfheContext ctx(TfheParams::preset("desk"));
  Rng rng(11);
  const LweKey key = lwe_keygen(ctx.params().n_lwe, rng);
  EXPECT_EQ(ctx.decrypt(ctx.encrypt(0, key, rng), key), 0);
  for (std::int64_t m = 0; m < 32; ++m) {
    for (int t = 0; t < 100; ++t) {
      const LweCiphertext ct = ctx.encrypt(m, key, rng);
      ASSERT_EQ(ctx.decrypt(ct, key), m);
      const Torus err = lwe_phase(ct, key) - encode_message(m, 32);
      EXPECT_LT(torus_distance(err, 0), static_cast<std::int64_t>(kTorusModulus / 64));
    }
  }
}

TEST(TfhePoly, ProductMatchesSchoolbook) {
  Rng rng(3);
  for (std::size_t n : {8u, 64u, 1024u}) {
    std::vector<Torus> t(n);
    for (auto& x : t) x = rng.next_u32();
    const auto k = n == 1024 ? rng.binary_vector(n) : rng.ternary_vector(n);
    EXPECT_EQ(torus_poly_mul(t, k), schoolbook(t, k)) << n;
  }
}

TEST(TfhePoly, MonomialRotationIsNegacyclic) {
  const std::vector<Torus> p{1, 2, 3, 4};
  EXPECT_EQ(monomial_mul(p, 0), p);
  EXPECT_EQ(monomial_mul(p, 1), (std::vector<Torus>{Torus(0) - 4, 1, 2, 3}));
  EXPECT_EQ(monomial_mul(p, 4), (std::vector<Torus>{Torus(0) - 1, Torus(0) - 2, Torus(0) - 3, Torus(0) - 4}));
  EXPECT_EQ(monomial_mul(monomial_mul(p, 3), 5), p);
  std::vector<std::int64_t> x3{0, 0, 0, 1};
  EXPECT_EQ(monomial_mul(p, 3), schoolbook(p, x3));
}

TEST_F(DeskTfhe, ExternalProductSelectsMessage) {
  Rng rng(21);
  const std::size_t n = params().N;
  const double bound = static_cast<double>(params().levels) * n *
                       std::ldexp(1.0, params().base_log - 1) * params().sigma_bsk;
  const RgswCiphertext zero = engine().rgsw_encrypt(0, keys_->tlwe, params().sigma_bsk, rng);
  const RgswCiphertext one = engine().rgsw_encrypt(1, keys_->tlwe, params().sigma_bsk, rng);
  std::int64_t worst = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<Torus> mu(n);
    for (auto& x : mu) x = encode_message(static_cast<std::int64_t>(rng.uniform(32)), 32);
    const TlweCiphertext c = tlwe_encrypt(mu, keys_->tlwe, params().sigma_lwe, rng);
    const auto in_phase = tlwe_phase(c, keys_->tlwe);
    const auto p1 = tlwe_phase(engine().external_product(c, one), keys_->tlwe);
    const auto p0 = tlwe_phase(engine().external_product(c, zero), keys_->tlwe);
    for (std::size_t i = 0; i < n; ++i) {
      // Added noise relative to the input phase.
      worst = std::max(worst, torus_distance(p1[i], in_phase[i]));
      worst = std::max(worst, torus_distance(p0[i], 0));
    }
  }
  EXPECT_LE(static_cast<double>(worst), bound);
}

TEST_F(DeskTfhe, CmuxSelection) {
  Rng rng(22);
  const std::size_t n = params().N;
  std::vector<Torus> m0(n), m1(n);
  for (std::size_t i = 0; i < n; ++i) {
    m0[i] = encode_message(static_cast<std::int64_t>(i % 32), 32);
    m1[i] = encode_message(static_cast<std::int64_t>((i * 7 + 3) % 32), 32);
  }
  const TlweCiphertext d0 = tlwe_encrypt(m0, keys_->tlwe, params().sigma_lwe, rng);
  const TlweCiphertext d1 = tlwe_encrypt(m1, keys_->tlwe, params().sigma_lwe, rng);
  auto decode = [&](const TlweCiphertext& c) {
    std::vector<std::int64_t> out;
    for (Torus x : tlwe_phase(c, keys_->tlwe)) out.push_back(decode_message(x, 32));
    return out;
  };
  const auto want0 = decode(d0);
  const auto want1 = decode(d1);
  for (std::int64_t bit : {0, 1}) {
    const RgswCiphertext g = engine().rgsw_encrypt(bit, keys_->tlwe, params().sigma_bsk, rng);
    EXPECT_EQ(decode(engine().cmux(g, d1, d0)), bit ? want1 : want0);
    EXPECT_EQ(decode(engine().cmux(g, d0, d0)), want0);
  }
}

TEST_F(DeskTfhe, ExternalProductBatchIsBitIdentical) {
  Rng rng(23);
  const RgswCiphertext g = engine().rgsw_encrypt(1, keys_->tlwe, params().sigma_bsk, rng);
  std::vector<TlweCiphertext> cs;
  for (int j = 0; j < 3; ++j) {
    std::vector<Torus> mu(params().N);
    for (auto& x : mu) x = rng.next_u32();
    cs.push_back(tlwe_encrypt(mu, keys_->tlwe, params().sigma_lwe, rng));
  }
  const auto batch = engine().external_product_batch(cs, g);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(batch[j], engine().external_product(cs[j], g));
}

TEST_F(DeskTfhe, ExternalProductRejectsMismatch) {
  Rng rng(24);
  const RgswCiphertext g = engine().rgsw_encrypt(1, keys_->tlwe, params().sigma_bsk, rng);
  const TlweCiphertext small = tlwe_trivial(std::vector<Torus>(512, 0));
  EXPECT_EQ(code_of([&] { engine().external_product(small, g); }), ErrorCode::ParamMismatch);
  RgswCiphertext other = g;
  other.levels = 2;
  const TlweCiphertext c = tlwe_trivial(std::vector<Torus>(params().N, 0));
  EXPECT_EQ(code_of([&] { engine().external_product(c, other); }), ErrorCode::ParamMismatch);
}

namespace {

// Constant term of X^{-phase} * poly with phase in [0, 2N).
Torus rotated_constant(const std::vector<Torus>& poly, std::size_t phase) {
  const std::size_t n = poly.size();
  return phase < n ? poly[phase] : Torus{0} - poly[phase - n];
}

std::vector<Torus> random_message_poly(std::size_t n, Rng& rng) {
  std::vector<Torus> p(n);
  for (auto& x : p) x = encode_message(static_cast<std::int64_t>(rng.uniform(32)), 32);
  return p;
}

}  // namespace

TEST_F(DeskTfhe, BlindRotateZeroKeyOnlyRotatesByB) {
  Rng rng(31);
  const std::size_t n = params().N;
  const LweKey zero_key{std::vector<std::int64_t>(params().n_lwe, 0)};
  const BootstrapKey bsk = engine().bootstrap_keygen(zero_key, keys_->tlwe, params().sigma_bsk, rng);
  const auto poly = random_message_poly(n, rng);
  ScaledLwe s;
  s.modulus = static_cast<std::uint32_t>(2 * n);
  s.b = 777;
  for (std::size_t i = 0; i < params().n_lwe; ++i) s.a.push_back(static_cast<std::uint32_t>(rng.uniform(2 * n)));
  const TlweCiphertext acc0 = tlwe_trivial(monomial_mul(poly, 2 * n - s.b));
  const auto phase = tlwe_phase(engine().blind_rotate(acc0, s, bsk), keys_->tlwe);
  const auto want = monomial_mul(poly, 2 * n - s.b);
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(decode_message(phase[i], 32), decode_message(want[i], 32));
}

TEST_F(DeskTfhe, BlindRotateSingleBit) {
  Rng rng(32);
  const std::size_t n = params().N;
  LweKey key{std::vector<std::int64_t>(params().n_lwe, 0)};
  key.s[5] = 1;
  const BootstrapKey bsk = engine().bootstrap_keygen(key, keys_->tlwe, params().sigma_bsk, rng);
  const auto poly = random_message_poly(n, rng);
  ScaledLwe s;
  s.modulus = static_cast<std::uint32_t>(2 * n);
  s.b = 100;
  for (std::size_t i = 0; i < params().n_lwe; ++i) s.a.push_back(static_cast<std::uint32_t>(rng.uniform(2 * n)));
  const auto out = tlwe_phase(engine().blind_rotate(initial_accumulator({{}, poly, 32}, s), s, bsk),
                              keys_->tlwe);
  // X^{a_5 - b}
  const auto want = monomial_mul(poly, (s.a[5] + 2 * n - s.b) % (2 * n));
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(decode_message(out[i], 32), decode_message(want[i], 32));
}

TEST_F(DeskTfhe, BlindRotateConstantTermFollowsPhase) {
  Rng rng(33);
  const std::size_t n = params().N;
  const std::size_t two_n = 2 * n;
  for (int t = 0; t < 50; ++t) {
    const auto poly = random_message_poly(n, rng);
    ScaledLwe s;
    s.modulus = static_cast<std::uint32_t>(two_n);
    s.b = static_cast<std::uint32_t>(rng.uniform(two_n));
    std::int64_t phase = s.b;
    for (std::size_t i = 0; i < params().n_lwe; ++i) {
      s.a.push_back(static_cast<std::uint32_t>(rng.uniform(two_n)));
      phase -= static_cast<std::int64_t>(s.a[i]) * keys_->lwe.s[i];
    }
    phase = ((phase % static_cast<std::int64_t>(two_n)) + two_n) % two_n;
    const auto out = tlwe_phase(
        engine().blind_rotate(initial_accumulator({{}, poly, 32}, s), s, keys_->bsk), keys_->tlwe);
    EXPECT_EQ(decode_message(out[0], 32),
              decode_message(rotated_constant(poly, static_cast<std::size_t>(phase)), 32));
  }
}

TEST_F(DeskTfhe, BlindRotateRejectsShortKey) {
  ScaledLwe s;
  s.modulus = static_cast<std::uint32_t>(2 * params().N);
  s.a.assign(params().n_lwe + 1, 0);
  const TlweCiphertext acc = tlwe_trivial(std::vector<Torus>(params().N, 0));
  EXPECT_EQ(code_of([&] { engine().blind_rotate(acc, s, keys_->bsk); }), ErrorCode::KeyLengthMismatch);
}

TEST_F(DeskTfhe, SampleExtract) {
  Rng rng(41);
  const std::size_t n = params().N;
  const LweKey ext = extracted_key(keys_->tlwe);

  std::vector<Torus> p(n);
  for (auto& x : p) x = rng.next_u32();
  const TlweCiphertext triv = tlwe_trivial(p);
  for (std::size_t idx : {std::size_t{0}, std::size_t{1}, n - 1}) {
    EXPECT_EQ(lwe_phase(sample_extract(triv, idx), ext), p[idx]);
  }

  for (int t = 0; t < 100; ++t) {
    const auto mu = random_message_poly(n, rng);
    const TlweCiphertext c = tlwe_encrypt(mu, keys_->tlwe, params().sigma_lwe, rng);
    const std::size_t idx = rng.uniform(n);
    // Exact phase equality, not just message equality.
    ASSERT_EQ(lwe_phase(sample_extract(c, idx), ext), tlwe_phase(c, keys_->tlwe)[idx]);
  }

  const TlweCiphertext c1 = tlwe_encrypt(random_message_poly(n, rng), keys_->tlwe, 4096, rng);
  const TlweCiphertext c2 = tlwe_encrypt(random_message_poly(n, rng), keys_->tlwe, 4096, rng);
  EXPECT_EQ(sample_extract(tlwe_add(c1, c2), 9), lwe_add(sample_extract(c1, 9), sample_extract(c2, 9)));
  EXPECT_EQ(code_of([&] { sample_extract(c1, n); }), ErrorCode::IndexOutOfRange);
}

TEST_F(DeskTfhe, KeySwitchPreservesMessage) {
  Rng rng(51);
  const LweKey ext = extracted_key(keys_->tlwe);
  const LweCiphertext triv = lwe_trivial(encode_message(9, 32), params().N);
  EXPECT_EQ(ctx_->decrypt(lwe_key_switch(triv, keys_->ksk), keys_->lwe), 9);
  for (int t = 0; t < 100; ++t) {
    const std::int64_t m = static_cast<std::int64_t>(rng.uniform(32));
    const LweCiphertext ct = lwe_encrypt(encode_message(m, 32), ext, params().sigma_lwe, rng);
    ASSERT_EQ(lwe_decrypt(ct, ext, 32), m);
    ASSERT_EQ(ctx_->decrypt(lwe_key_switch(ct, keys_->ksk), keys_->lwe), m);
  }
  EXPECT_EQ(code_of([&] { lwe_key_switch(lwe_trivial(0, 7), keys_->ksk); }), ErrorCode::KeyMismatch);
}

TEST_F(DeskTfhe, KeySwitchComposition) {
  Rng rng(52);
  const LweKey ext = extracted_key(keys_->tlwe);
  const LweKey mid = lwe_keygen(64, rng);
  const auto k1 = lwe_keyswitch_keygen(ext, mid, 4, 8, params().sigma_ks, rng);
  const auto k2 = lwe_keyswitch_keygen(mid, keys_->lwe, 4, 8, params().sigma_ks, rng);
  for (int t = 0; t < 20; ++t) {
    const LweCiphertext ct = lwe_encrypt(encode_message(t, 32), ext, params().sigma_lwe, rng);
    const Torus direct = lwe_phase(lwe_key_switch(ct, keys_->ksk), keys_->lwe);
    const Torus twice = lwe_phase(lwe_key_switch(lwe_key_switch(ct, k1), k2), keys_->lwe);
    EXPECT_LT(torus_distance(direct, twice), static_cast<std::int64_t>(kTorusModulus / 256));
  }
}

TEST(TfheLut, WindowsAndNegacyclicExtension) {
  const LookupTable lut = make_lut(64, 16, [](std::int64_t m) { return 3 * m; });
  ASSERT_EQ(lut.values.size(), 8u);
  // window = N / (p/2) = 8
  for (std::size_t j = 0; j < 64; ++j) {
    EXPECT_EQ(decode_message(lut.poly[j], 16), (3 * static_cast<std::int64_t>(j / 8)) % 16);
  }
  // Phases in the upper half of Z_{2N} read -f.
  for (std::size_t phase = 64; phase < 128; ++phase) {
    EXPECT_EQ(rotated_constant(lut.poly, phase), Torus{0} - lut.poly[phase - 64]);
  }
  EXPECT_EQ(code_of([] { make_lut(64, 12, [](std::int64_t m) { return m; }); }),
            ErrorCode::ParamMismatch);
}

TEST_F(DeskTfhe, BootstrapIdentityOnAlphabet) {
  Rng rng(61);
  const LookupTable lut = ctx_->identity_lut();
  for (int rep = 0; rep < 2; ++rep) {
    for (std::int64_t m = 0; m < static_cast<std::int64_t>(params().alphabet()); ++m) {
      const LweCiphertext ct = ctx_->encrypt(m, keys_->lwe, rng);
      const LweCiphertext out = ctx_->programmable_bootstrap(ct, lut, keys_->bsk, keys_->ksk);
      ASSERT_EQ(ctx_->decrypt(out, keys_->lwe), m);
    }
  }
}

TEST_F(DeskTfhe, BootstrapSignOnSignedAlphabet) {
  Rng rng(62);
  const LookupTable lut = ctx_->sign_lut();
  const std::int64_t half = static_cast<std::int64_t>(params().alphabet()) / 2;
  for (int t = 0; t < 100; ++t) {
    const std::int64_t m = static_cast<std::int64_t>(rng.uniform(2 * half)) - half;
    const LweCiphertext out =
        ctx_->programmable_bootstrap(ctx_->encrypt(m, keys_->lwe, rng), lut, keys_->bsk, keys_->ksk);
    ASSERT_EQ(ctx_->decrypt(out, keys_->lwe), m >= 0 ? 1 : 31) << m;
  }
}

TEST_F(DeskTfhe, BootstrapRefreshesNoise) {
  Rng rng(63);
  const LookupTable lut = ctx_->identity_lut();
  // Input noise near the edge of the window still lands on the right value.
  for (std::int64_t m = 0; m < 16; ++m) {
    LweCiphertext ct = ctx_->encrypt(m, keys_->lwe, rng);
    ct.b += static_cast<Torus>(kTorusModulus / 32 / 2 - (1u << 24));
    const LweCiphertext out = ctx_->programmable_bootstrap(ct, lut, keys_->bsk, keys_->ksk);
    const Torus err = lwe_phase(out, keys_->lwe) - encode_message(m, 32);
    EXPECT_LT(torus_distance(err, 0), std::int64_t{1} << 20);
  }
}
