#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "fhesw/gadget.hpp"
#include "fhesw/modarith.hpp"
#include "fhesw/rng.hpp"
#include "fhesw/rns_poly.hpp"

using namespace fhesw;

namespace {

RnsBasis ntt_basis(unsigned bits, std::size_t count, std::size_t n) {
  std::vector<Modulus> ms;
  for (u64 q : generate_ntt_primes(bits, count, n)) ms.emplace_back(q, n);
  return RnsBasis(std::move(ms));
}

RnsPoly random_poly(const RnsBasis& b, std::size_t n, Rng& rng) {
  RnsPoly p(n, b);
  for (std::size_t i = 0; i < b.level(); ++i) {
    for (auto& x : p.residues(i)) x = rng.uniform(b[i].value());
  }
  return p;
}

}  // namespace

TEST(ModArith, SmallCases) {
  const Modulus m(13);
  EXPECT_EQ(mod_mul(7, 9, m), 11u);
  EXPECT_EQ(mod_mul(0, 5, m), 0u);
  EXPECT_EQ(mod_mul(12, 1, m), 12u);
}

TEST(ModArith, MatchesWideReference) {
  Rng rng(1);
  for (unsigned bits : {20u, 40u, 54u, 60u}) {
    const u64 q = generate_ntt_primes(bits, 1, 1024)[0];
    const Modulus m(q);
    for (int i = 0; i < 2000; ++i) {
      const u64 a = rng.uniform(q);
      const u64 b = rng.uniform(q);
      EXPECT_EQ(mod_mul(a, b, m), static_cast<u64>((static_cast<u128>(a) * b) % q));
      const ShoupConstant w(b, m);
      EXPECT_EQ(mul_shoup(a, w, q), mod_mul(a, b, m));
    }
  }
}

TEST(ModArith, SignedLifts) {
  const Modulus m(97);
  EXPECT_EQ(mod_from_signed(-1, m), 96u);
  EXPECT_EQ(mod_from_signed(-97, m), 0u);
  EXPECT_EQ(mod_from_signed(INT64_MIN, m), mod_neg(static_cast<u64>((u128{1} << 63) % 97), m));
  EXPECT_EQ(mod_from_i128(-(static_cast<__int128>(1) << 100), m),
            mod_neg(static_cast<u64>((u128{1} << 100) % 97), m));
  EXPECT_EQ(mod_centered(96, m), -1);
  EXPECT_EQ(mod_centered(48, m), 48);
}

TEST(Modulus, RootInvariants) {
  for (std::size_t n : {16u, 1024u, 8192u}) {
    for (u64 q : generate_ntt_primes(54, 2, n)) {
      const Modulus m(q, n);
      EXPECT_TRUE(is_prime(q));
      EXPECT_EQ(q % (2 * n), 1u);
      EXPECT_EQ(mod_pow(m.psi(), 2 * n, m), 1u);
      EXPECT_EQ(mod_pow(m.psi(), n, m), q - 1);
      EXPECT_EQ(mod_mul(m.psi(), m.psi_inv(), m), 1u);
      EXPECT_EQ(mod_mul(n % q, m.n_inv(), m), 1u);
    }
  }
}

TEST(Modulus, RejectsUnfriendlyPrime) {
  EXPECT_THROW(Modulus(97, 64), Error);
  EXPECT_THROW(Modulus(91, 2), Error);
}

TEST(Modulus, PrimeSearchIsReproducible) {
  const auto a = generate_ntt_primes(50, 3, 4096);
  const auto b = generate_ntt_primes(50, 3, 4096);
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::set<u64>(a.begin(), a.end()).size(), 3u);
  const auto c = generate_ntt_primes(50, 2, 4096, a);
  for (u64 q : c) EXPECT_EQ(std::count(a.begin(), a.end(), q), 0);
}

TEST(RnsPoly, ArithmeticIdentities) {
  const auto b = ntt_basis(40, 2, 16);
  Rng rng(2);
  const RnsPoly p = random_poly(b, 16, rng);
  const RnsPoly zero(16, b);
  EXPECT_EQ(p + zero, p);
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_TRUE((p + (-p)).is_zero());

  std::vector<std::int64_t> one(16, 0);
  one[0] = 1;
  const RnsPoly ones = RnsPoly::from_signed(b, one, Domain::Eval);
  for (std::size_t i = 0; i < b.level(); ++i) {
    for (u64 x : ones.residues(i)) EXPECT_EQ(x, 1u);
  }
  const RnsPoly pe = to_eval(p);
  EXPECT_EQ(poly_pointwise_mul(ones, pe), pe);
}

TEST(RnsPoly, MismatchErrors) {
  const auto b1 = ntt_basis(40, 2, 16);
  const auto b2 = ntt_basis(41, 2, 16);
  const RnsPoly p(16, b1);
  const RnsPoly q(16, b2);
  const RnsPoly pe(16, b1, Domain::Eval);
  try {
    (void)poly_add(p, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BasisMismatch);
  }
  try {
    (void)poly_sub(p, pe);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainMismatch);
  }
  try {
    (void)poly_pointwise_mul(p, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainMismatch);
  }
  EXPECT_THROW((void)schoolbook_negacyclic_mul(pe, pe), Error);
}

TEST(RnsPoly, SchoolbookExamples) {
  const RnsBasis b17({Modulus(17)});
  auto mono = [&](std::size_t k) {
    std::vector<std::int64_t> c(4, 0);
    c[k] = 1;
    return RnsPoly::from_signed(b17, c);
  };
  const RnsPoly wrap = schoolbook_negacyclic_mul(mono(3), mono(1));
  EXPECT_EQ(wrap.at(0, 0), 16u);
  EXPECT_EQ(wrap.at(0, 1), 0u);

  const std::vector<std::int64_t> one_plus_x = {1, 1, 0, 0};
  const RnsPoly a = RnsPoly::from_signed(b17, one_plus_x);
  const RnsPoly sq = schoolbook_negacyclic_mul(a, a);
  const std::vector<u64> expect = {1, 2, 1, 0};
  EXPECT_EQ(std::vector<u64>(sq.residues(0).begin(), sq.residues(0).end()), expect);
  EXPECT_EQ(schoolbook_negacyclic_mul(mono(0), a), a);
}

TEST(RnsPoly, TransformProductMatchesSchoolbook) {
  const RnsBasis b97({Modulus(97, 16)});
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const RnsPoly a = random_poly(b97, 16, rng);
    const RnsPoly c = random_poly(b97, 16, rng);
    EXPECT_EQ(ntt_negacyclic_mul(a, c), schoolbook_negacyclic_mul(a, c));
  }
  const auto big = ntt_basis(58, 3, 256);
  const RnsPoly a = random_poly(big, 256, rng);
  const RnsPoly c = random_poly(big, 256, rng);
  EXPECT_EQ(ntt_negacyclic_mul(a, c), schoolbook_negacyclic_mul(a, c));
}

TEST(RnsPoly, TruncationKeepsLeadingResidues) {
  const auto b = ntt_basis(40, 3, 16);
  Rng rng(4);
  const RnsPoly p = random_poly(b, 16, rng);
  const RnsPoly t = p.truncated(2);
  EXPECT_EQ(t.level(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(std::equal(t.residues(i).begin(), t.residues(i).end(), p.residues(i).begin()));
  }
  EXPECT_THROW((void)p.truncated(0), Error);
}

namespace {

// Exact CRT over a basis of small primes; products stay below 2^127.
u128 crt(const RnsPoly& p, std::size_t j) {
  u128 Q = 1;
  for (std::size_t i = 0; i < p.level(); ++i) Q *= p.basis()[i].value();
  u128 x = 0;
  for (std::size_t i = 0; i < p.level(); ++i) {
    const u64 qi = p.basis()[i].value();
    const u128 qhat = Q / qi;
    u128 inv = 1;
    const u64 r = static_cast<u64>(qhat % qi);
    for (u64 k = 1; k < qi; ++k) {
      if ((static_cast<u128>(r) * k) % qi == 1) {
        inv = k;
        break;
      }
    }
    x = (x + (static_cast<u128>(p.at(i, j)) * inv % qi) * qhat) % Q;
  }
  return x;
}

}  // namespace

TEST(Bconv, ApproximateConversionAgreesWithCrt) {
  std::vector<Modulus> src_ms = {Modulus(12289), Modulus(40961), Modulus(65537)};
  std::vector<Modulus> dst_ms = {Modulus(114689), Modulus(147457), Modulus(163841)};
  const RnsBasis src(src_ms);
  const RnsBasis dst(dst_ms);
  u128 Qs = 1;
  for (const auto& m : src_ms) Qs *= m.value();
  u128 Qd = 1;
  for (const auto& m : dst_ms) Qd *= m.value();
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    RnsPoly p(8, src);
    std::vector<u128> values(8);
    for (std::size_t j = 0; j < 8; ++j) {
      values[j] = static_cast<u128>(rng.uniform(static_cast<u64>(Qs)));
      for (std::size_t i = 0; i < 3; ++i) p.at(i, j) = static_cast<u64>(values[j] % src_ms[i].value());
    }
    const RnsPoly out = bconv(p, dst);
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_EQ(crt(p, j), values[j]);
      const u128 y = crt(out, j);
      bool found = false;
      for (u128 k = 0; k < 3; ++k) found = found || (y == values[j] + k * Qs);
      EXPECT_TRUE(found);
    }
    // The return trip may add its own multiple of Q_dst.
    const RnsPoly back = bconv(out, src);
    for (std::size_t j = 0; j < 8; ++j) {
      const u128 y = crt(out, j);
      const u128 z = crt(back, j);
      bool found = false;
      for (u128 k = 0; k < 3; ++k) found = found || (z == (y + k * Qd) % Qs);
      EXPECT_TRUE(found);
    }
  }
}

TEST(Bconv, TrivialCases) {
  const RnsBasis b({Modulus(12289)});
  const RnsBasis d({Modulus(40961), Modulus(65537)});
  EXPECT_TRUE(bconv(RnsPoly(8, b), d).is_zero());
  Rng rng(6);
  const RnsPoly p = random_poly(b, 8, rng);
  EXPECT_EQ(bconv(p, b), p);
}

TEST(Gadget, HandExpansion) {
  const Gadget g(2, 2, 16);
  EXPECT_EQ(g.decompose(7), (std::vector<std::int64_t>{-1, 2}));
  EXPECT_EQ(g.scales(), (std::vector<u64>{1, 4}));
  EXPECT_THROW(Gadget(2, 1, 16), Error);
}

TEST(Gadget, RecompositionIsExact) {
  const std::size_t n = 64;
  const Modulus m(generate_ntt_primes(54, 1, n)[0], n);
  const RnsBasis b({m});
  for (auto [base_log, levels] : {std::pair{5u, 11u}, std::pair{19u, 3u}, std::pair{28u, 2u}}) {
    const Gadget g(base_log, levels, m.value());
    const std::int64_t half = std::int64_t{1} << (base_log - 1);
    Rng rng(7 + base_log);
    for (int trial = 0; trial < 100; ++trial) {
      const RnsPoly p = random_poly(b, n, rng);
      const auto digits = gadget_decompose(p, g);
      ASSERT_EQ(digits.size(), levels);
      EXPECT_EQ(gadget_recompose(digits, g), p);
      for (const auto& d : digits) {
        for (u64 x : d.residues(0)) {
          const std::int64_t c = mod_centered(x, m);
          EXPECT_GE(c, -half);
          EXPECT_LE(c, half);
        }
      }
      for (std::size_t i = 0; i + 1 < levels; ++i) {
        for (u64 x : digits[i].residues(0)) EXPECT_LT(mod_centered(x, m), half);
      }
    }
    for (const auto& d : gadget_decompose(RnsPoly(n, b), g)) EXPECT_TRUE(d.is_zero());
  }
}

TEST(Rng, EqualSeedsGiveEqualStreams) {
  Rng a(42), b(42), c(43);
  std::vector<u64> xa, xb, xc;
  for (int i = 0; i < 100; ++i) {
    xa.push_back(a.next_u64());
    xb.push_back(b.next_u64());
    xc.push_back(c.next_u64());
  }
  EXPECT_EQ(xa, xb);
  EXPECT_NE(xa, xc);
  EXPECT_EQ(Rng(9).fork(3).next_u64(), Rng(9).fork(3).next_u64());
  EXPECT_NE(Rng(9).fork(3).next_u64(), Rng(9).fork(4).next_u64());
}

TEST(Rng, DistributionShapes) {
  Rng rng(11);
  const auto t = rng.ternary_vector(30000);
  std::array<int, 3> counts{};
  for (auto v : t) {
    ASSERT_GE(v, -1);
    ASSERT_LE(v, 1);
    counts[static_cast<std::size_t>(v + 1)]++;
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  double sum = 0, sq = 0;
  for (int i = 0; i < 20000; ++i) {
    const double g = static_cast<double>(rng.gaussian());
    sum += g;
    sq += g * g;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.1);
  EXPECT_NEAR(std::sqrt(sq / 20000), 3.2, 0.15);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.uniform(7), 7u);
}
