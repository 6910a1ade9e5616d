#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fhesw/ckks.hpp"

using namespace fhesw;

namespace {

std::vector<Complex> random_values(std::size_t n, Rng& rng) {
  std::vector<Complex> v(n);
  for (auto& x : v) {
    const double re = static_cast<double>(rng.uniform(1u << 20)) / (1u << 19) - 1.0;
    const double im = static_cast<double>(rng.uniform(1u << 20)) / (1u << 19) - 1.0;
    x = {re, im};
  }
  return v;
}

double max_error(const std::vector<Complex>& x, const std::vector<Complex>& y) {
  double e = 0;
  for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - y[i]));
  return e;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvariantViolation;
}

class DeskCkks : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = new CkksContext(CkksParams::preset("desk"));
    Rng rng(100);
    sk_ = new CkksSecretKey(ctx_->keygen(rng));
    relin_ = new KeySwitchKey(ctx_->relin_keygen(*sk_, rng));
    galois_ = new GaloisKeys(ctx_->galois_keygen(*sk_, {0, 1, -1, 5}, rng));
  }
  static void TearDownTestSuite() {
    delete galois_;
    delete relin_;
    delete sk_;
    delete ctx_;
  }

  std::vector<Complex> roundtrip(const CkksCiphertext& ct) const {
    return ctx_->decode(ctx_->decrypt(ct, *sk_));
  }

  static CkksContext* ctx_;
  static CkksSecretKey* sk_;
  static KeySwitchKey* relin_;
  static GaloisKeys* galois_;
};

CkksContext* DeskCkks::ctx_ = nullptr;
CkksSecretKey* DeskCkks::sk_ = nullptr;
KeySwitchKey* DeskCkks::relin_ = nullptr;
GaloisKeys* DeskCkks::galois_ = nullptr;

}  // namespace

TEST(CkksParams, Presets) {
  const auto desk = CkksParams::preset("desk");
  EXPECT_EQ(desk.n, 8192u);
  EXPECT_EQ(desk.prime_bits.size(), 6u);
  EXPECT_EQ(CkksParams::preset("paper").prime_bits.size(), 45u);
  EXPECT_EQ(code_of([] { (void)CkksParams::preset("nope"); }), ErrorCode::ConfigError);
  CkksParams bad = CkksParams::preset("switch-desk");
  bad.slots = 32;
  EXPECT_EQ(code_of([&] { CkksContext c(bad); }), ErrorCode::SlotCountMismatch);
}

TEST(Encoder, MatchesDirectEvaluation) {
  const CkksContext ctx(CkksParams::preset("switch-desk"));
  Rng rng(1);
  for (std::size_t slots : {2u, 8u, 16u}) {
    const auto v = random_values(slots, rng);
    const double delta = std::ldexp(1.0, 30);
    const auto pt = ctx.encode(v, delta, 1);
    const auto c = ctx.coefficients(pt.poly);
    const std::size_t n = 32;
    for (std::size_t k = 0; k < slots; ++k) {
      std::size_t e = 1;
      for (std::size_t i = 0; i < k; ++i) e = (e * 5) % (2 * n);
      Complex sum = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double angle = std::numbers::pi * static_cast<double>(e * j) / static_cast<double>(n);
        sum += c[j] * Complex(std::cos(angle), std::sin(angle));
      }
      EXPECT_LT(std::abs(sum / delta - v[k]), 1e-6) << "slots=" << slots << " k=" << k;
    }
  }
}

TEST_F(DeskCkks, EncodeRoundtripAndLinearity) {
  Rng rng(2);
  const auto v = random_values(4096, rng);
  const auto w = random_values(4096, rng);
  const auto pv = ctx_->encode(v);
  EXPECT_LT(max_error(ctx_->decode(pv), v), std::ldexp(1.0, -20));
  const auto pw = ctx_->encode(w);
  const CkksPlaintext sum{poly_add(pv.poly, pw.poly), pv.scale, pv.slots};
  std::vector<Complex> vw(4096);
  for (std::size_t i = 0; i < 4096; ++i) vw[i] = v[i] + w[i];
  EXPECT_LT(max_error(ctx_->decode(sum), vw), std::ldexp(1.0, -19));
  EXPECT_TRUE(ctx_->encode(std::vector<Complex>(4096)).poly.is_zero());
  EXPECT_EQ(code_of([&] { (void)ctx_->encode(std::vector<Complex>(3)); }), ErrorCode::SlotCountMismatch);
  EXPECT_EQ(code_of([&] { (void)ctx_->encode(std::vector<Complex>(2048)); }), ErrorCode::SlotCountMismatch);
}

TEST_F(DeskCkks, EncryptDecrypt) {
  Rng rng(3);
  const auto zero = ctx_->encrypt_zero(6, ctx_->params().scale, 4096, *sk_, rng);
  for (double c : ctx_->coefficients(ctx_->decrypt(zero, *sk_).poly)) EXPECT_LE(std::fabs(c), 40.0);
  const auto v = random_values(4096, rng);
  const auto pt = ctx_->encode(v);
  const auto c1 = ctx_->encrypt(pt, *sk_, rng);
  const auto c2 = ctx_->encrypt(pt, *sk_, rng);
  EXPECT_FALSE(c1.a == c2.a);
  EXPECT_LT(max_error(roundtrip(c1), v), std::ldexp(1.0, -18));
}

TEST_F(DeskCkks, AdditionAndPlainProducts) {
  Rng rng(4);
  const auto v = random_values(4096, rng);
  const auto w = random_values(4096, rng);
  const auto cv = ctx_->encrypt(ctx_->encode(v), *sk_, rng);
  const auto cw = ctx_->encrypt(ctx_->encode(w), *sk_, rng);
  const auto z = ctx_->encrypt_zero(6, ctx_->params().scale, 4096, *sk_, rng);
  EXPECT_LT(max_error(roundtrip(ctx_->hadd(cv, z)), v), std::ldexp(1.0, -17));
  std::vector<Complex> sum(4096), prod(4096);
  for (std::size_t i = 0; i < 4096; ++i) {
    sum[i] = v[i] + w[i];
    prod[i] = v[i] * w[i];
  }
  EXPECT_LT(max_error(roundtrip(ctx_->hadd(cv, cw)), sum), std::ldexp(1.0, -17));
  EXPECT_LT(max_error(roundtrip(ctx_->padd(cv, ctx_->encode(w))), sum), std::ldexp(1.0, -17));

  const double q_last = static_cast<double>(ctx_->prime(5).value());
  const auto one = ctx_->encode(std::vector<Complex>(4096, 1.0), q_last, 6);
  const auto same = ctx_->rescale(ctx_->pmul(cv, one));
  EXPECT_EQ(same.level(), 5u);
  EXPECT_DOUBLE_EQ(same.scale, ctx_->params().scale * q_last / q_last);
  EXPECT_LT(max_error(roundtrip(same), v), std::ldexp(1.0, -17));

  const auto pw = ctx_->rescale(ctx_->pmul(cv, ctx_->encode(w)));
  EXPECT_LT(max_error(roundtrip(pw), prod), std::ldexp(1.0, -15));
}

TEST_F(DeskCkks, HomomorphicProduct) {
  Rng rng(5);
  const auto v = random_values(4096, rng);
  const auto w = random_values(4096, rng);
  const auto cv = ctx_->encrypt(ctx_->encode(v), *sk_, rng);
  const auto cw = ctx_->encrypt(ctx_->encode(w), *sk_, rng);
  const auto prod = ctx_->hmul(cv, cw, *relin_);
  const double delta = ctx_->params().scale;
  EXPECT_DOUBLE_EQ(prod.scale, delta * delta);
  const auto r = ctx_->rescale(prod);
  EXPECT_EQ(r.level(), 5u);
  EXPECT_EQ(r.scale, delta * delta / static_cast<double>(ctx_->prime(5).value()));
  std::vector<Complex> expect(4096);
  for (std::size_t i = 0; i < 4096; ++i) expect[i] = v[i] * w[i];
  EXPECT_LT(max_error(roundtrip(r), expect), std::ldexp(1.0, -15));

  const auto ones = ctx_->encrypt(ctx_->encode(std::vector<Complex>(4096, 1.0)), *sk_, rng);
  EXPECT_LT(max_error(roundtrip(ctx_->rescale(ctx_->hmul(cv, ones, *relin_))), v), std::ldexp(1.0, -15));

  // Argmax survives rescaling.
  std::vector<Complex> peaked(4096, 0.1);
  peaked[1234] = 0.9;
  const auto cp = ctx_->encrypt(ctx_->encode(peaked), *sk_, rng);
  const auto sq = roundtrip(ctx_->rescale(ctx_->hmul(cp, cp, *relin_)));
  const auto it = std::max_element(sq.begin(), sq.end(),
                                   [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
  EXPECT_EQ(it - sq.begin(), 1234);
}

TEST_F(DeskCkks, LevelAndScaleErrors) {
  Rng rng(6);
  const auto v = random_values(4096, rng);
  const auto cv = ctx_->encrypt(ctx_->encode(v), *sk_, rng);
  const auto low = ctx_->rescale(ctx_->hmul(cv, cv, *relin_));
  EXPECT_EQ(code_of([&] { (void)ctx_->hadd(cv, low); }), ErrorCode::LevelMismatch);
  EXPECT_EQ(code_of([&] { (void)ctx_->hmul(cv, low, *relin_); }), ErrorCode::LevelMismatch);
  const auto dropped = ctx_->mod_drop(cv, 5);
  EXPECT_EQ(code_of([&] { (void)ctx_->hadd(dropped, ctx_->pmul(dropped, ctx_->encode(v, 2.0, 5))); }),
            ErrorCode::ScaleMismatch);
  const auto bottom = ctx_->mod_drop(cv, 1);
  EXPECT_EQ(code_of([&] { (void)ctx_->rescale(bottom); }), ErrorCode::InsufficientLevel);
  EXPECT_EQ(code_of([&] { (void)ctx_->hmul(bottom, bottom, *relin_); }), ErrorCode::InsufficientLevel);
  EXPECT_EQ(code_of([&] { (void)ctx_->hrot(cv, 3, *galois_); }), ErrorCode::MissingGaloisKey);
}

TEST_F(DeskCkks, Rotation) {
  Rng rng(7);
  const auto v = random_values(4096, rng);
  const auto cv = ctx_->encrypt(ctx_->encode(v), *sk_, rng);
  EXPECT_LT(max_error(roundtrip(ctx_->hrot(cv, 0, *galois_)), v), std::ldexp(1.0, -15));
  for (std::int64_t k : {1, 5}) {
    std::vector<Complex> rotated(4096);
    for (std::size_t i = 0; i < 4096; ++i) rotated[i] = v[(i + static_cast<std::size_t>(k)) % 4096];
    EXPECT_LT(max_error(roundtrip(ctx_->hrot(cv, k, *galois_)), rotated), std::ldexp(1.0, -15));
  }
  const auto back = ctx_->hrot(ctx_->hrot(cv, 1, *galois_), -1, *galois_);
  EXPECT_LT(max_error(roundtrip(back), v), std::ldexp(1.0, -15));
}

TEST(Automorph, SmallRingExample) {
  const RnsBasis b({Modulus(17, 4)});
  const std::vector<std::int64_t> c = {3, 5, 7, 11};
  const RnsPoly p = RnsPoly::from_signed(b, c);
  const RnsPoly r = automorph(p, 1);
  const std::vector<std::int64_t> expect = {3, -5, 7, -11};
  EXPECT_EQ(r, RnsPoly::from_signed(b, expect));
  EXPECT_EQ(automorph(p, 0), p);
}

TEST(Automorph, GroupLawAndRingHomomorphism) {
  const std::size_t n = 64;
  std::vector<Modulus> ms;
  for (u64 q : generate_ntt_primes(40, 2, n)) ms.emplace_back(q, n);
  const RnsBasis b(ms);
  Rng rng(8);
  auto random_poly = [&] {
    RnsPoly p(n, b);
    for (std::size_t i = 0; i < 2; ++i) {
      for (auto& x : p.residues(i)) x = rng.uniform(b[i].value());
    }
    return p;
  };
  for (int t = 0; t < 20; ++t) {
    const RnsPoly p = random_poly();
    const RnsPoly r = random_poly();
    const auto k1 = static_cast<std::int64_t>(rng.uniform(64)) - 32;
    const auto k2 = static_cast<std::int64_t>(rng.uniform(64)) - 32;
    EXPECT_EQ(automorph(automorph(p, k1), k2), automorph(p, k1 + k2));
    EXPECT_EQ(automorph(schoolbook_negacyclic_mul(p, r), k1),
              schoolbook_negacyclic_mul(automorph(p, k1), automorph(r, k1)));
    EXPECT_EQ(to_eval(automorph(p, k1)), automorph(to_eval(p), k1));
    const std::size_t g = 2 * rng.uniform(n) + 1;
    EXPECT_EQ(to_eval(automorph_galois(p, g)), automorph_galois(to_eval(p), g));
  }
}
