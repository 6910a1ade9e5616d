#include "fhesw/ntt_plan.hpp"

#include <algorithm>
#include <cstdlib>
#include <json.hpp>

#include "fhesw/ntt.hpp"
#include "fhesw/parallel.hpp"

namespace fhesw {

std::string_view to_string(NttVariant v) {
  switch (v) {
    case NttVariant::Baseline: return "baseline";
    case NttVariant::BD: return "bd";
    case NttVariant::TA: return "ta";
  }
  return "?";
}

std::string_view to_string(BarrierKind k) { return k == BarrierKind::Global ? "GLOBAL" : "LOCAL"; }

NttVariant parse_variant(std::string_view name) {
  if (name == "baseline") return NttVariant::Baseline;
  if (name == "bd") return NttVariant::BD;
  if (name == "ta") return NttVariant::TA;
  throw Error(ErrorCode::InvalidArgument, "unknown NTT variant '" + std::string(name) + "'");
}

void SyncTrace::record(const BarrierRecord& r) {
  (r.kind == BarrierKind::Global ? global_barriers : local_barriers)++;
  log.push_back(r);
}

namespace {

constexpr std::size_t kMaxBlockThreads = 1024;

constexpr std::size_t mask(unsigned bits) { return (std::size_t{1} << bits) - 1; }

unsigned checked_log(std::size_t n) {
  if (n < 2 || !is_pow2(n)) throw Error(ErrorCode::InvalidArgument, "N must be a power of two >= 2");
  return log2_exact(n);
}

void check_fuse(std::size_t n, unsigned fuse) {
  if (fuse < 2 || fuse >= 8 * sizeof(std::size_t) || (std::size_t{1} << fuse) > n) {
    throw Error(ErrorCode::InvalidF, "F=" + std::to_string(fuse) + " for N=" + std::to_string(n));
  }
}

// Fills everything derived from (n, variant, fuse, pcs, ossp, chunks).
void finalize(NttPlan& p) {
  p.superstages.clear();
  for (unsigned s = 0; s < p.log_n; s += p.fuse) {
    p.superstages.push_back({s, std::min(s + p.fuse, p.log_n), -1});
  }
  const std::size_t K = p.superstages.size();
  p.chunk_size = p.n / p.chunks;
  const unsigned log_t = log2_exact(p.chunks);
  const unsigned log_h = log2_exact(p.chunk_size);
  p.aggregated = p.variant == NttVariant::TA ? (1u << p.fuse) : 0;
  p.threads_per_block = p.chunk_size / (p.variant == NttVariant::TA ? p.aggregated : 2);

  unsigned phase1 = 0;
  while (phase1 < K && p.superstages[phase1].begin < log_t) ++phase1;
  if (K > 0 && phase1 > K - 1) throw Error(ErrorCode::InvariantViolation, "switch point past the last barrier");
  p.i1 = phase1;
  p.i2 = K == 0 ? 0 : static_cast<unsigned>(K - 1 - phase1);

  p.rounds.clear();
  if (p.pcs) {
    for (unsigned k = 0; k < phase1; ++k) {
      const unsigned lo = p.log_n - p.superstages[k].end;
      const unsigned hi = p.log_n - p.superstages[k].begin;
      if (hi - lo > log_h) throw Error(ErrorCode::InvariantViolation, "superstage wider than a chunk");
      if (!p.rounds.empty()) {
        ShuffleRound& r = p.rounds.back();
        if (r.low_bit + r.width - lo <= log_h) {
          r.width += r.low_bit - lo;
          r.low_bit = lo;
          p.superstages[k].round = static_cast<int>(p.rounds.size() - 1);
          continue;
        }
      }
      p.rounds.push_back({lo, hi - lo});
      p.superstages[k].round = static_cast<int>(p.rounds.size() - 1);
    }
  }

  const bool resident = p.pcs || p.ossp;
  auto local = [&](const Superstage& s) { return s.round >= 0 || p.log_n - s.begin <= log_h; };
  p.barriers.clear();
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const Superstage& a = p.superstages[k];
    const Superstage& b = p.superstages[k + 1];
    const bool same = resident && a.round == b.round && local(a) && local(b);
    p.barriers.push_back(same ? BarrierKind::Local : BarrierKind::Global);
  }
}

NttPlan make_plan(std::size_t n, NttVariant variant, unsigned fuse) {
  NttPlan p;
  p.n = n;
  p.log_n = checked_log(n);
  p.variant = variant;
  p.fuse = fuse;
  const std::size_t per_thread = variant == NttVariant::TA ? (std::size_t{1} << fuse) : 2;
  p.chunks = n / std::min(n, kMaxBlockThreads * per_thread);
  finalize(p);
  return p;
}

}  // namespace

std::size_t NttPlan::threads(std::size_t k) const {
  return variant == NttVariant::TA ? n >> superstages.at(k).width() : n / 2;
}

std::size_t NttPlan::work_per_thread(std::size_t k) const {
  const unsigned w = superstages.at(k).width();
  switch (variant) {
    case NttVariant::Baseline: return 1;
    case NttVariant::BD: return std::size_t{1} << w;
    case NttVariant::TA: return w * (std::size_t{1} << (w - 1));
  }
  return 0;
}

std::size_t NttPlan::position(std::size_t k, std::size_t j) const noexcept {
  const int r = superstages[k].round;
  if (r < 0) return j;
  const ShuffleRound& s = rounds[static_cast<std::size_t>(r)];
  const unsigned a = s.low_bit;
  const unsigned b = s.low_bit + s.width;
  return (j & ~mask(b)) | ((j >> a) & mask(s.width)) | ((j & mask(a)) << s.width);
}

std::vector<std::size_t> NttPlan::shuffle_map(std::size_t round) const {
  if (round >= rounds.size()) throw Error(ErrorCode::IndexOutOfRange, "no such shuffle round");
  std::size_t k = 0;
  while (superstages[k].round != static_cast<int>(round)) ++k;
  std::vector<std::size_t> m(n);
  for (std::size_t j = 0; j < n; ++j) m[j] = position(k, j);
  return m;
}

std::vector<std::size_t> NttPlan::unshuffle_map(std::size_t round) const {
  const auto fwd = shuffle_map(round);
  std::vector<std::size_t> inv(n);
  for (std::size_t j = 0; j < n; ++j) inv[fwd[j]] = j;
  return inv;
}

SyncTrace NttPlan::schedule(bool inverse) const {
  SyncTrace t;
  const std::size_t K = superstages.size();
  for (std::size_t i = 0; i + 1 < K; ++i) {
    const std::size_t k = inverse ? K - 1 - i : i;
    const BarrierKind kind = inverse ? barriers[k - 1] : barriers[k];
    t.record({superstages[k].begin, superstages[k].end, kind, chunks});
  }
  return t;
}

NttPlan plan_baseline(std::size_t n) { return make_plan(n, NttVariant::Baseline, 1); }

NttPlan plan_bd(std::size_t n, unsigned fuse) {
  checked_log(n);
  check_fuse(n, fuse);
  return make_plan(n, NttVariant::BD, fuse);
}

NttPlan plan_ta(std::size_t n, unsigned fuse) {
  checked_log(n);
  check_fuse(n, fuse);
  return make_plan(n, NttVariant::TA, fuse);
}

NttPlan apply_pcs(NttPlan plan) {
  plan.pcs = true;
  finalize(plan);
  return plan;
}

NttPlan plan_switch_point(std::size_t n, unsigned fuse, NttVariant variant, unsigned i1) {
  const unsigned log_n = checked_log(n);
  if (variant == NttVariant::Baseline) {
    fuse = 1;
  } else {
    check_fuse(n, fuse);
  }
  if (2 * fuse * i1 > log_n) {
    throw Error(ErrorCode::InvalidArgument, "switch point needs T <= N / T");
  }
  NttPlan p;
  p.n = n;
  p.log_n = log_n;
  p.variant = variant;
  p.fuse = fuse;
  p.ossp = true;
  p.chunks = std::size_t{1} << (fuse * i1);
  finalize(p);
  return p;
}

NttPlan plan_ossp(std::size_t n, unsigned fuse, NttVariant variant, const ExecutorConfig& cfg) {
  if (cfg.sms == 0) throw Error(ErrorCode::InvalidArgument, "S must be at least 1");
  const unsigned log_n = checked_log(n);
  if (variant == NttVariant::Baseline) {
    fuse = 1;
  } else {
    check_fuse(n, fuse);
  }
  const auto dist = [&](std::size_t x) { return x > cfg.sms ? x - cfg.sms : cfg.sms - x; };
  unsigned best = 0;
  for (unsigned i1 = 1; 2 * fuse * i1 <= log_n; ++i1) {
    if (dist(std::size_t{1} << (fuse * i1)) < dist(std::size_t{1} << (fuse * best))) best = i1;
  }
  return plan_switch_point(n, fuse, variant, best);
}

namespace {

struct Lane {
  std::span<u64> data;
  std::vector<u64> replica;
  const TwiddleTable* tw;
};

struct UnitGeometry {
  unsigned begin, end, width, low_bit, log_n;

  std::size_t element(std::size_t j0, std::size_t r) const noexcept { return j0 + (r << low_bit); }
  std::size_t twiddle(unsigned stage, std::size_t g) const noexcept {
    return (std::size_t{1} << stage) + (g >> (log_n - stage));
  }
  // Step k in [1, width]: forward stage and its local bit.
  unsigned stage(bool inverse, unsigned k) const noexcept {
    return inverse ? end - k : begin + k - 1;
  }
  unsigned local_bit(unsigned stage_index) const noexcept { return end - 1 - stage_index; }
};

// One thread per unit, complete butterflies in place.
void run_unit_inplace(std::span<u64> a, const TwiddleTable& tw, const UnitGeometry& g,
                      std::size_t j0, bool inverse, bool scale) {
  const u64 q = tw.modulus();
  const std::size_t size = std::size_t{1} << g.width;
  for (unsigned k = 1; k <= g.width; ++k) {
    const unsigned st = g.stage(inverse, k);
    const unsigned lb = g.local_bit(st);
    for (std::size_t r = 0; r < size; ++r) {
      if (r & (std::size_t{1} << lb)) continue;
      const std::size_t lo = g.element(j0, r);
      const std::size_t hi = g.element(j0, r | (std::size_t{1} << lb));
      if (inverse) {
        gs_butterfly(a[lo], a[hi], tw.inverse(g.twiddle(st, lo)), q);
      } else {
        ct_butterfly(a[lo], a[hi], tw.forward(g.twiddle(st, lo)), q);
      }
    }
  }
  if (scale) {
    for (std::size_t r = 0; r < size; ++r) {
      u64& x = a[g.element(j0, r)];
      x = mul_shoup(x, tw.n_inv(), q);
    }
  }
}

// Each of the 2^(width-1) threads of a unit reads the whole unit from src and
// evaluates the cone of half-butterflies that ends in its two outputs.
void run_unit_cones(std::span<const u64> src, std::span<u64> dst, const TwiddleTable& tw,
                    const UnitGeometry& g, std::size_t j0, bool inverse, bool scale,
                    std::vector<u64>& cur, std::vector<u64>& next) {
  const u64 q = tw.modulus();
  const unsigned w = g.width;
  const std::size_t size = std::size_t{1} << w;
  cur.resize(size);
  next.resize(size);
  // beta(k): local bit touched at step k.
  auto beta = [&](unsigned k) { return g.local_bit(g.stage(inverse, k)); };
  const unsigned out_bit = beta(w);
  for (std::size_t t = 0; t < size / 2; ++t) {
    const std::size_t base = ((t >> out_bit) << (out_bit + 1)) | (t & mask(out_bit));
    for (std::size_t r = 0; r < size; ++r) cur[r] = src[g.element(j0, r)];
    for (unsigned k = 1; k <= w; ++k) {
      std::size_t free = std::size_t{1} << out_bit;
      if (k < w) {
        for (unsigned m = k + 1; m <= w; ++m) free |= std::size_t{1} << beta(m);
      }
      const unsigned st = g.stage(inverse, k);
      const std::size_t bit = std::size_t{1} << beta(k);
      std::size_t sub = free;
      while (true) {
        const std::size_t r = (base & ~free) | sub;
        const std::size_t lo = r & ~bit;
        const u64 u = cur[lo];
        const u64 v = cur[r | bit];
        const std::size_t gi = g.twiddle(st, g.element(j0, lo));
        if (inverse) {
          next[r] = r == lo ? add_q(u, v, q) : mul_shoup(sub_q(u, v, q), tw.inverse(gi), q);
        } else {
          const u64 wv = mul_shoup(v, tw.forward(gi), q);
          next[r] = r == lo ? add_q(u, wv, q) : sub_q(u, wv, q);
        }
        if (sub == 0) break;
        sub = (sub - 1) & free;
      }
      std::swap(cur, next);
    }
    for (std::size_t r : {base, base | (std::size_t{1} << out_bit)}) {
      const u64 x = cur[r];
      dst[g.element(j0, r)] = scale ? mul_shoup(x, tw.n_inv(), q) : x;
    }
  }
}

void execute(std::vector<Lane>& lanes, const NttPlan& plan, const ExecutorConfig& cfg,
             bool inverse, SyncTrace& trace) {
  const std::size_t K = plan.superstages.size();
  const bool bd = plan.variant == NttVariant::BD;

  // units[k][c]: base indices of the units of superstage k owned by chunk c.
  std::vector<std::vector<std::vector<std::size_t>>> units(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Superstage& s = plan.superstages[k];
    const unsigned low_bit = plan.log_n - s.end;
    units[k].resize(plan.chunks);
    for (std::size_t u = 0; u < (plan.n >> s.width()); ++u) {
      const std::size_t j0 = ((u >> low_bit) << (low_bit + s.width())) | (u & mask(low_bit));
      units[k][plan.chunk_of(k, j0)].push_back(j0);
    }
  }

  std::vector<std::size_t> order(K);
  for (std::size_t i = 0; i < K; ++i) order[i] = inverse ? K - 1 - i : i;
  auto barrier_after = [&](std::size_t i) {
    const std::size_t k = order[i];
    return inverse ? plan.barriers[k - 1] : plan.barriers[k];
  };

  const std::size_t workers = cfg.mode == ExecutorConfig::Mode::Pooled ? cfg.workers : 1;
  std::size_t first = 0;
  while (first < K) {
    std::size_t last = first;
    while (last + 1 < K && barrier_after(last) == BarrierKind::Local) ++last;

    const std::size_t jobs = lanes.size() * plan.chunks;
    parallel_for(jobs, workers, [&](std::size_t job) {
      Lane& lane = lanes[job / plan.chunks];
      const std::size_t c = job % plan.chunks;
      std::vector<u64> cur, next;
      for (std::size_t i = first; i <= last; ++i) {
        const std::size_t k = order[i];
        const Superstage& s = plan.superstages[k];
        const UnitGeometry g{s.begin, s.end, s.width(), plan.log_n - s.end, plan.log_n};
        const bool scale = inverse && i + 1 == K;
        for (std::size_t j0 : units[k][c]) {
          if (bd) {
            std::span<u64> replica(lane.replica);
            std::span<u64> src = i % 2 == 0 ? lane.data : replica;
            std::span<u64> dst = i % 2 == 0 ? replica : lane.data;
            run_unit_cones(src, dst, *lane.tw, g, j0, inverse, scale, cur, next);
          } else {
            run_unit_inplace(lane.data, *lane.tw, g, j0, inverse, scale);
          }
        }
      }
    });

    for (std::size_t i = first; i <= last && i + 1 < K; ++i) {
      const Superstage& s = plan.superstages[order[i]];
      trace.record({s.begin, s.end, barrier_after(i), plan.chunks});
    }
    first = last + 1;
  }

  if (bd && K % 2 == 1) {
    for (Lane& lane : lanes) std::copy(lane.replica.begin(), lane.replica.end(), lane.data.begin());
  }
}

void check_lane(std::span<u64> a, const TwiddleTable& tw, const NttPlan& plan) {
  if (a.size() != plan.n || tw.degree() != plan.n) {
    throw Error(ErrorCode::PlanMismatch, "plan built for N=" + std::to_string(plan.n) +
                                             ", input has N=" + std::to_string(a.size()));
  }
}

SyncTrace run_spans(std::span<u64> a, const TwiddleTable& tw, const NttPlan& plan,
                    const ExecutorConfig& cfg, bool inverse) {
  check_lane(a, tw, plan);
  std::vector<Lane> lanes;
  lanes.push_back({a, plan.variant == NttVariant::BD ? std::vector<u64>(a.size()) : std::vector<u64>{}, &tw});
  SyncTrace trace;
  execute(lanes, plan, cfg, inverse, trace);
  return trace;
}

std::pair<RnsPoly, SyncTrace> run_poly(const RnsPoly& p, const NttPlan& plan,
                                       const ExecutorConfig& cfg, bool inverse) {
  if (p.degree() != plan.n) {
    throw Error(ErrorCode::PlanMismatch, "plan built for N=" + std::to_string(plan.n) +
                                             ", input has N=" + std::to_string(p.degree()));
  }
  const Domain expected = inverse ? Domain::Eval : Domain::Coeff;
  if (p.domain() != expected) throw Error(ErrorCode::DomainMismatch, "transform input domain");
  RnsPoly out = p;
  std::vector<Lane> lanes;
  for (std::size_t i = 0; i < out.level(); ++i) {
    const Modulus& m = out.basis()[i];
    if (!m.has_roots() || m.degree() != plan.n) {
      throw Error(ErrorCode::PlanMismatch, "prime carries no roots for this N");
    }
    lanes.push_back({out.residues(i),
                     plan.variant == NttVariant::BD ? std::vector<u64>(plan.n) : std::vector<u64>{},
                     &m.twiddles()});
  }
  SyncTrace trace;
  execute(lanes, plan, cfg, inverse, trace);
  out.set_domain(inverse ? Domain::Coeff : Domain::Eval);
  return {std::move(out), std::move(trace)};
}

}  // namespace

SyncTrace execute_forward(std::span<u64> a, const TwiddleTable& tw, const NttPlan& plan,
                          const ExecutorConfig& cfg) {
  return run_spans(a, tw, plan, cfg, false);
}

SyncTrace execute_inverse(std::span<u64> a, const TwiddleTable& tw, const NttPlan& plan,
                          const ExecutorConfig& cfg) {
  return run_spans(a, tw, plan, cfg, true);
}

std::pair<RnsPoly, SyncTrace> ntt_forward(const RnsPoly& p, const NttPlan& plan,
                                          const ExecutorConfig& cfg) {
  return run_poly(p, plan, cfg, false);
}

std::pair<RnsPoly, SyncTrace> ntt_inverse(const RnsPoly& p, const NttPlan& plan,
                                          const ExecutorConfig& cfg) {
  return run_poly(p, plan, cfg, true);
}

std::pair<RnsPoly, SyncTrace> execute_plan(const RnsPoly& p, const NttPlan& plan,
                                           const ExecutorConfig& cfg) {
  return run_poly(p, plan, cfg, p.domain() == Domain::Eval);
}

std::string plan_to_json(const NttPlan& plan) {
  nlohmann::ordered_json j;
  j["N"] = plan.n;
  j["variant"] = std::string(to_string(plan.variant)) + (plan.ossp ? "+ossp" : "") +
                 (plan.pcs ? "+pcs" : "");
  j["F"] = plan.fuse;
  j["I1"] = plan.i1;
  j["I2"] = plan.i2;
  j["T"] = plan.chunks;
  j["E"] = plan.threads_per_block;
  j["H"] = plan.chunk_size;
  j["barriers"] = nlohmann::ordered_json::array();
  const SyncTrace t = plan.schedule();
  for (const auto& b : t.log) {
    j["barriers"].push_back(
        {{"stages", {b.stage_begin, b.stage_end}}, {"kind", to_string(b.kind)}, {"chunks", b.chunks}});
  }
  return j.dump(2);
}

}  // namespace fhesw
