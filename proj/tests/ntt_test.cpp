#include <gtest/gtest.h>

#include <json.hpp>
#include <numeric>

#include "fhesw/ntt.hpp"
#include "fhesw/ntt_plan.hpp"
#include "fhesw/rng.hpp"

using namespace fhesw;

namespace {

RnsBasis basis_for(std::size_t n, std::size_t count = 2) {
  std::vector<Modulus> ms;
  for (u64 q : generate_ntt_primes(50, count, n)) ms.emplace_back(q, n);
  return RnsBasis(std::move(ms));
}

RnsPoly random_poly(const RnsBasis& b, std::size_t n, Rng& rng) {
  RnsPoly p(n, b);
  for (std::size_t i = 0; i < b.level(); ++i) {
    for (auto& x : p.residues(i)) x = rng.uniform(b[i].value());
  }
  return p;
}

std::vector<NttPlan> all_plans(std::size_t n) {
  std::vector<NttPlan> plans{plan_baseline(n), apply_pcs(plan_baseline(n))};
  for (unsigned f = 2; f <= 4 && (std::size_t{1} << f) <= n; ++f) {
    for (NttVariant v : {NttVariant::BD, NttVariant::TA}) {
      NttPlan p = v == NttVariant::BD ? plan_bd(n, f) : plan_ta(n, f);
      plans.push_back(p);
      plans.push_back(apply_pcs(p));
      for (std::size_t sms : {1u, 46u, 108u}) {
        ExecutorConfig cfg;
        cfg.sms = sms;
        plans.push_back(plan_ossp(n, f, v, cfg));
        plans.push_back(apply_pcs(plan_ossp(n, f, v, cfg)));
      }
    }
  }
  return plans;
}

std::string describe(const NttPlan& p) {
  return std::string(to_string(p.variant)) + " F=" + std::to_string(p.fuse) +
         " T=" + std::to_string(p.chunks) + (p.pcs ? " pcs" : "") + (p.ossp ? " ossp" : "");
}

}  // namespace

TEST(Reference, ImpulseAndZero) {
  const std::size_t n = 64;
  const auto b = basis_for(n);
  std::vector<std::int64_t> delta(n, 0);
  delta[0] = 1;
  const RnsPoly e = to_eval(RnsPoly::from_signed(b, delta));
  for (std::size_t i = 0; i < b.level(); ++i) {
    for (u64 x : e.residues(i)) EXPECT_EQ(x, 1u);
  }
  EXPECT_TRUE(to_eval(RnsPoly(n, b)).is_zero());
  EXPECT_EQ(to_coeff(e), RnsPoly::from_signed(b, delta));
}

TEST(Reference, Roundtrip) {
  Rng rng(1);
  for (unsigned logn = 10; logn <= 16; ++logn) {
    const std::size_t n = std::size_t{1} << logn;
    const auto b = basis_for(n, 1);
    for (int t = 0; t < 100; ++t) {
      const RnsPoly p = random_poly(b, n, rng);
      ASSERT_EQ(to_coeff(to_eval(p)), p);
    }
  }
}

TEST(Reference, ConvolutionAtQ97) {
  const RnsBasis b({Modulus(97, 16)});
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const RnsPoly x = random_poly(b, 16, rng);
    const RnsPoly y = random_poly(b, 16, rng);
    const RnsPoly xe = ntt_forward(x, plan_bd(16, 2)).first;
    const RnsPoly ye = ntt_forward(y, plan_ta(16, 2)).first;
    const RnsPoly z = ntt_inverse(poly_pointwise_mul(xe, ye), plan_baseline(16)).first;
    EXPECT_EQ(z, schoolbook_negacyclic_mul(x, y));
  }
}

TEST(PlanShape, BaselineCounts) {
  EXPECT_EQ(plan_baseline(16).schedule().total(), 3u);
  const NttPlan p = plan_baseline(4096);
  EXPECT_EQ(p.schedule().global_barriers, 11u);
  EXPECT_EQ(p.schedule().local_barriers, 0u);
  EXPECT_EQ(plan_baseline(2).schedule().total(), 0u);
  for (unsigned logn = 1; logn <= 16; ++logn) {
    EXPECT_EQ(plan_baseline(std::size_t{1} << logn).schedule().total(), logn - 1);
  }
}

TEST(PlanShape, ButterflyDecomposition) {
  const NttPlan p16 = plan_bd(16, 2);
  EXPECT_EQ(p16.schedule().total(), 1u);
  EXPECT_EQ(p16.threads(0), 8u);
  EXPECT_EQ(p16.work_per_thread(0), 4u);
  const NttPlan p = plan_bd(1024, 2);
  EXPECT_EQ(p.superstages.size(), 5u);
  EXPECT_EQ(p.schedule().total(), 4u);
  const NttPlan odd = plan_bd(2048, 2);
  EXPECT_EQ(odd.superstages.size(), 6u);
  EXPECT_EQ(odd.superstages.back().width(), 1u);
  EXPECT_EQ(odd.threads(5), 1024u);
  for (unsigned logn = 2; logn <= 16; ++logn) {
    for (unsigned f = 2; f <= std::min(logn, 5u); ++f) {
      const std::size_t expect = (logn + f - 1) / f - 1;
      EXPECT_EQ(plan_bd(std::size_t{1} << logn, f).schedule().total(), expect);
      EXPECT_EQ(plan_ta(std::size_t{1} << logn, f).schedule().total(), expect);
    }
  }
}

TEST(PlanShape, ThreadAggregation) {
  const NttPlan p = plan_ta(16, 2);
  EXPECT_EQ(p.threads(0), 4u);
  EXPECT_EQ(p.work_per_thread(0), 4u);
  EXPECT_EQ(p.aggregated, 4u);
  // Butterfly count is invariant: K * H * log_4(16) = (16 / 2) * log2(16).
  const std::size_t total = p.threads(0) * p.work_per_thread(0) * p.superstages.size();
  EXPECT_EQ(total, 32u);
  EXPECT_EQ(total, (16u / 2) * 4);
  for (unsigned logn = 4; logn <= 16; logn += 2) {
    const std::size_t n = std::size_t{1} << logn;
    const NttPlan q = plan_ta(n, 2);
    EXPECT_EQ(q.threads(0) * q.work_per_thread(0) * q.superstages.size(), n / 2 * logn);
  }
}

TEST(PlanShape, InvalidFuse) {
  for (auto make : {plan_bd, plan_ta}) {
    try {
      (void)make(16, 5);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidF);
    }
    EXPECT_THROW((void)make(16, 1), Error);
  }
  EXPECT_THROW((void)plan_baseline(12), Error);
}

TEST(PlanShape, CoefficientShuffling) {
  const NttPlan p = apply_pcs(plan_baseline(4096));
  const SyncTrace t = p.schedule();
  EXPECT_EQ(t.global_barriers, 1u);
  EXPECT_EQ(t.local_barriers, 10u);
  ASSERT_EQ(p.rounds.size(), 1u);
  const auto m = p.shuffle_map(0);
  const auto u = p.unshuffle_map(0);
  std::vector<std::size_t> sorted = m;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(4096);
  std::iota(iota.begin(), iota.end(), 0);
  EXPECT_EQ(sorted, iota);
  for (std::size_t j = 0; j < 4096; ++j) EXPECT_EQ(u[m[j]], j);
  EXPECT_EQ(p.schedule().total(), plan_baseline(4096).schedule().total());
}

TEST(PlanShape, SwitchPoint) {
  ExecutorConfig a100;
  a100.sms = 108;
  const NttPlan p = plan_ossp(65536, 2, NttVariant::BD, a100);
  EXPECT_EQ(p.chunks, 64u);
  EXPECT_EQ(p.i1, 3u);
  EXPECT_EQ(p.i2, 4u);
  EXPECT_EQ(p.threads_per_block, 512u);
  EXPECT_EQ(p.chunk_size, 1024u);
  EXPECT_EQ(p.schedule().global_barriers, 3u);
  EXPECT_EQ(p.schedule().local_barriers, 4u);
  const NttPlan q = apply_pcs(p);
  EXPECT_EQ(q.schedule().global_barriers, 1u);
  EXPECT_EQ(q.schedule().local_barriers, 6u);
  EXPECT_EQ(q.i1 + q.i2, 7u);

  ExecutorConfig rtx;
  rtx.sms = 46;
  EXPECT_EQ(plan_ossp(65536, 2, NttVariant::BD, rtx).chunks, 64u);
  const NttPlan ta = plan_ossp(65536, 2, NttVariant::TA, rtx);
  EXPECT_EQ(ta.threads_per_block, 65536u / (64 * 4));

  // 40 is equidistant from 16 and 64.
  ExecutorConfig tie;
  tie.sms = 40;
  EXPECT_EQ(plan_ossp(65536, 2, NttVariant::BD, tie).chunks, 16u);
  ExecutorConfig huge;
  huge.sms = 100000;
  EXPECT_EQ(plan_ossp(65536, 2, NttVariant::BD, huge).chunks, 256u);
}

TEST(Executor, EveryPlanMatchesReference) {
  Rng rng(3);
  for (unsigned logn : {4u, 5u, 10u, 11u, 13u}) {
    const std::size_t n = std::size_t{1} << logn;
    const auto b = basis_for(n);
    const RnsPoly x = random_poly(b, n, rng);
    const RnsPoly ref = to_eval(x);
    for (const NttPlan& plan : all_plans(n)) {
      auto [y, t] = ntt_forward(x, plan);
      ASSERT_EQ(y, ref) << describe(plan) << " N=" << n;
      EXPECT_EQ(t, plan.schedule()) << describe(plan);
      auto [z, ti] = ntt_inverse(y, plan);
      ASSERT_EQ(z, x) << describe(plan) << " N=" << n;
      EXPECT_EQ(ti, plan.schedule(true)) << describe(plan);
    }
  }
}

TEST(Executor, LargeRingSweep) {
  Rng rng(4);
  const std::size_t n = 65536;
  const auto b = basis_for(n, 1);
  const RnsPoly x = random_poly(b, n, rng);
  const RnsPoly ref = to_eval(x);
  ExecutorConfig cfg;
  cfg.sms = 108;
  std::vector<NttPlan> plans{plan_baseline(n), apply_pcs(plan_baseline(n)), plan_bd(n, 2),
                             plan_ta(n, 2), apply_pcs(plan_ta(n, 2)),
                             plan_ossp(n, 2, NttVariant::TA, cfg),
                             apply_pcs(plan_ossp(n, 2, NttVariant::BD, cfg))};
  for (const NttPlan& plan : plans) {
    auto [y, t] = ntt_forward(x, plan);
    ASSERT_EQ(y, ref) << describe(plan);
    ASSERT_EQ(ntt_inverse(y, plan).first, x) << describe(plan);
  }
}

TEST(Executor, PooledMatchesSerial) {
  Rng rng(5);
  const std::size_t n = 4096;
  const auto b = basis_for(n, 3);
  const RnsPoly x = random_poly(b, n, rng);
  ExecutorConfig serial;
  ExecutorConfig pooled;
  pooled.mode = ExecutorConfig::Mode::Pooled;
  pooled.workers = 8;
  for (const NttPlan& plan : all_plans(n)) {
    const auto a = ntt_forward(x, plan, serial);
    const auto c = ntt_forward(x, plan, pooled);
    EXPECT_EQ(a.first, c.first) << describe(plan);
    EXPECT_EQ(a.second, c.second) << describe(plan);
    EXPECT_EQ(a.second.total(), plan.barriers.size());
  }
}

TEST(Executor, Errors) {
  const auto b = basis_for(16);
  const RnsPoly x(16, b);
  try {
    (void)ntt_forward(x, plan_baseline(32));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PlanMismatch);
  }
  EXPECT_THROW((void)ntt_inverse(x, plan_baseline(16)), Error);
}

TEST(PlanJson, Fields) {
  ExecutorConfig cfg;
  cfg.sms = 108;
  const auto j = nlohmann::json::parse(plan_to_json(apply_pcs(plan_ossp(65536, 2, NttVariant::TA, cfg))));
  EXPECT_EQ(j["N"], 65536);
  EXPECT_EQ(j["T"], 64);
  EXPECT_EQ(j["I1"], 3);
  EXPECT_EQ(j["I2"], 4);
  EXPECT_EQ(j["H"], 1024);
  EXPECT_EQ(j["E"], 256);
  EXPECT_EQ(j["barriers"].size(), 7u);
  EXPECT_EQ(j["barriers"][0]["kind"], "LOCAL");
  EXPECT_EQ(j["barriers"][2]["kind"], "GLOBAL");
}
