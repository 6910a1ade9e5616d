#include "fhesw/switching.hpp"

#include <cmath>
#include <json.hpp>

#include "fhesw/common.hpp"
#include "fhesw/parallel.hpp"

namespace fhesw {

std::string to_string(MatVecStrategy s) {
  switch (s) {
    case MatVecStrategy::Diagonal: return "diag";
    case MatVecStrategy::BSGS: return "bsgs";
    case MatVecStrategy::HRF: return "hrf";
  }
  return "?";
}

MatVecStrategy parse_matvec(std::string_view name) {
  if (name == "diag") return MatVecStrategy::Diagonal;
  if (name == "bsgs") return MatVecStrategy::BSGS;
  if (name == "hrf") return MatVecStrategy::HRF;
  throw Error(ErrorCode::ConfigError, "unknown matvec strategy '" + std::string(name) + "'");
}

std::string MatVecStats::to_json() const {
  nlohmann::ordered_json j;
  j["strategy"] = fhesw::to_string(strategy);
  j["d"] = d;
  j["rotations"] = rotations;
  j["scalar_mults"] = scalar_mults;
  j["rot_ciphertexts"] = rot_ciphertexts;
  j["rot_keys"] = rot_keys;
  return j.dump();
}

std::string to_string(LutMode m) { return m == LutMode::Slot ? "slot" : "batched"; }

LutMode parse_lut_mode(std::string_view name) {
  if (name == "slot") return LutMode::Slot;
  if (name == "batched") return LutMode::Batched;
  throw Error(ErrorCode::ConfigError, "unknown LUT mode '" + std::string(name) + "'");
}

std::string LutStats::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = fhesw::to_string(mode);
  j["n_slot"] = n_slot;
  j["n_lwe"] = n_lwe;
  j["cmux"] = cmux;
  j["key_accesses"] = key_accesses;
  j["ciphertexts_per_gate"] = ciphertexts_per_gate;
  return j.dump();
}

BsgsSplit bsgs_split(std::size_t d) {
  if (!is_pow2(d)) throw Error(ErrorCode::NonPowerOfTwoDims, "BSGS dimension must be a power of two");
  const unsigned log_d = log2_exact(d);
  const std::size_t giant = std::size_t{1} << ((log_d + 1) / 2);
  return {giant, d / giant};
}

std::string to_string(TilingMode m) {
  switch (m) {
    case TilingMode::Identity: return "identity";
    case TilingMode::RowTiling: return "row";
    case TilingMode::ColumnTiling: return "column";
  }
  return "?";
}

TiledMatrix tile_matrix(const std::vector<std::vector<double>>& a) {
  if (a.empty() || a[0].empty()) throw Error(ErrorCode::NonPowerOfTwoDims, "empty matrix");
  TiledMatrix t;
  t.rows = a.size();
  t.cols = a[0].size();
  for (const auto& row : a) {
    if (row.size() != t.cols) throw Error(ErrorCode::InvalidArgument, "ragged matrix");
  }
  if (!is_pow2(t.rows) || !is_pow2(t.cols)) {
    throw Error(ErrorCode::NonPowerOfTwoDims, "matrix dimensions must be powers of two");
  }
  t.d = std::max(t.rows, t.cols);
  t.m.resize(t.d);
  if (t.cols > t.rows) {
    t.mode = TilingMode::RowTiling;
    for (std::size_t k = 0; k < t.d; ++k) t.m[k] = a[k % t.rows];
  } else if (t.rows > t.cols) {
    t.mode = TilingMode::ColumnTiling;
    for (std::size_t k = 0; k < t.d; ++k) {
      t.m[k] = a[k];
      t.m[k].resize(t.d, 0.0);
    }
  } else {
    t.m = a;
  }
  return t;
}

std::vector<double> tile_key(const std::vector<double>& s, const TiledMatrix& t) {
  if (s.size() != t.cols) throw Error(ErrorCode::KeyLengthMismatch, "key length differs from columns");
  std::vector<double> out = s;
  out.resize(t.d, 0.0);
  return out;
}

std::vector<double> matrix_diagonal(const std::vector<std::vector<double>>& m, std::size_t i) {
  const std::size_t d = m.size();
  std::vector<double> u(d);
  for (std::size_t k = 0; k < d; ++k) u[k] = m[k][(k + i) % d];
  return u;
}

namespace {

template <typename T>
std::vector<T> rotate_left(const std::vector<T>& v, std::size_t k) {
  const std::size_t d = v.size();
  std::vector<T> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = v[(i + k) % d];
  return out;
}

std::vector<Complex> complex_diagonal(const std::vector<std::vector<Complex>>& m, std::size_t i) {
  const std::size_t d = m.size();
  std::vector<Complex> u(d);
  for (std::size_t k = 0; k < d; ++k) u[k] = m[k][(k + i) % d];
  return u;
}

/// Fixed-order pairwise reduction, independent of how the terms were made.
CkksCiphertext tree_sum(const CkksContext& ctx, std::vector<CkksCiphertext> terms) {
  while (terms.size() > 1) {
    std::vector<CkksCiphertext> next;
    next.reserve((terms.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(ctx.hadd(terms[i], terms[i + 1]));
    if (terms.size() % 2) next.push_back(std::move(terms.back()));
    terms = std::move(next);
  }
  return std::move(terms.front());
}

double plaintext_scale(const CkksContext& ctx, std::size_t level) {
  return static_cast<double>(ctx.prime(level - 1).value());
}

}  // namespace

LinearTransform::LinearTransform(const CkksContext& ctx, const std::vector<std::vector<Complex>>& m,
                                 std::size_t level, MatVecStrategy strategy)
    : ctx_(&ctx), strategy_(strategy), d_(m.size()) {
  if (strategy == MatVecStrategy::HRF) {
    throw Error(ErrorCode::StrategyPlanMismatch, "HRF needs a precomputed key-rotation bank");
  }
  if (!is_pow2(d_)) throw Error(ErrorCode::NonPowerOfTwoDims, "transform dimension");
  for (const auto& row : m) {
    if (row.size() != d_) throw Error(ErrorCode::InvalidArgument, "transform matrix must be square");
  }
  split_ = bsgs_split(d_);
  const double scale = plaintext_scale(ctx, level);
  diagonals_.reserve(d_);
  for (std::size_t i = 0; i < d_; ++i) {
    std::vector<Complex> u = complex_diagonal(m, i);
    if (strategy == MatVecStrategy::BSGS) {
      const std::size_t shift = (i / split_.baby) * split_.baby;
      u = rotate_left(u, d_ - shift);
    }
    diagonals_.push_back(ctx.encode(u, scale, level));
  }
}

CkksCiphertext LinearTransform::apply(const CkksCiphertext& x, const GaloisKeys& keys,
                                      MatVecStats* stats) const {
  if (x.slots != d_) throw Error(ErrorCode::SlotCountMismatch, "transform dimension differs from slots");
  MatVecStats st;
  st.strategy = strategy_;
  st.d = d_;
  std::vector<CkksCiphertext> terms;
  if (strategy_ == MatVecStrategy::Diagonal) {
    for (std::size_t i = 0; i < d_; ++i) {
      terms.push_back(ctx_->pmul(ctx_->hrot(x, static_cast<std::int64_t>(i), keys), diagonals_[i]));
      ++st.rotations, ++st.scalar_mults;
    }
    st.rot_ciphertexts = 1;
    st.rot_keys = d_;
  } else {
    std::vector<CkksCiphertext> baby;
    for (std::size_t b = 0; b < split_.baby; ++b) {
      baby.push_back(ctx_->hrot(x, static_cast<std::int64_t>(b), keys));
      ++st.rotations;
    }
    for (std::size_t g = 0; g < split_.giant; ++g) {
      std::vector<CkksCiphertext> inner;
      for (std::size_t b = 0; b < split_.baby; ++b) {
        inner.push_back(ctx_->pmul(baby[b], diagonals_[g * split_.baby + b]));
        ++st.scalar_mults;
      }
      terms.push_back(ctx_->hrot(tree_sum(*ctx_, std::move(inner)),
                                 static_cast<std::int64_t>(g * split_.baby), keys));
      ++st.rotations;
    }
    st.rot_ciphertexts = split_.baby;
    st.rot_keys = split_.baby + split_.giant - 1;  // step 0 is shared
  }
  if (stats) *stats = st;
  return ctx_->rescale(tree_sum(*ctx_, std::move(terms)));
}

std::size_t ExtractedBatch::dimension() const {
  if (cts.empty()) return 0;
  const std::size_t n = cts[0].dimension();
  for (const auto& c : cts) {
    if (c.dimension() != n) throw Error(ErrorCode::NonUniformBatch, "batch mixes LWE dimensions");
  }
  return n;
}

// ---- context --------------------------------------------------------------

SwitchContext::SwitchContext(const SwitchConfig& cfg, Rng& rng)
    : SwitchContext(CkksParams::preset(cfg.ckks_preset), TfheParams::preset(cfg.tfhe_preset),
                    cfg.workers, rng) {}

SwitchContext::SwitchContext(CkksParams ckks, TfheParams tfhe, std::size_t workers, Rng& rng)
    : ckks_(std::move(ckks)), tfhe_(std::move(tfhe)), workers_(std::max<std::size_t>(workers, 1)) {
  if (!is_pow2(n_slot()) || !is_pow2(n_lwe()) || repack_dim() > ckks_.degree() / 2) {
    throw Error(ErrorCode::ParamMismatch,
                "n_slot and n_lwe must be powers of two with max(n_slot, n_lwe) <= N/2");
  }
  ckks_sk_ = ckks_.keygen(rng);
  tfhe_keys_ = tfhe_.keygen(rng);
  const auto& tp = tfhe_.params();
  bridge_ = lwe_keyswitch_keygen(LweKey{ckks_sk_.coeffs}, tfhe_keys_.lwe, tp.ks_base_log,
                                 tp.ks_levels, tp.sigma_ks, rng);
  std::vector<std::int64_t> steps(repack_dim());
  for (std::size_t i = 0; i < steps.size(); ++i) steps[i] = static_cast<std::int64_t>(i);
  galois_ = ckks_.galois_keygen(ckks_sk_, steps, rng);

  std::vector<double> s(repack_dim(), 0.0);
  for (std::size_t i = 0; i < n_lwe(); ++i) s[i] = static_cast<double>(tfhe_keys_.lwe.s[i]);
  key_ct_ = ckks_.encrypt(ckks_.encode(s, ckks_.params().scale, ckks_.max_level()), ckks_sk_, rng);
}

CkksCiphertext SwitchContext::encrypt_slots(const std::vector<double>& values, Rng& rng) const {
  if (values.size() != n_slot()) {
    throw Error(ErrorCode::SlotCountMismatch, std::to_string(values.size()) + " values for " +
                                                  std::to_string(n_slot()) + " slots");
  }
  const double half = plain_modulus() / 2.0;
  for (double v : values) {
    if (!(v >= -half && v < half)) {
      throw Error(ErrorCode::AlphabetOverflow, "slot value " + std::to_string(v) +
                                                   " outside the TFHE message range");
    }
  }
  return ckks_.encrypt(ckks_.encode(values, ckks_.params().scale, ckks_.max_level()), ckks_sk_, rng);
}

std::vector<double> SwitchContext::decrypt_slots(const CkksCiphertext& ct) const {
  const auto z = ckks_.decode(ckks_.decrypt(ct, ckks_sk_));
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
  return out;
}

// ---- CKKS -> LWE ----------------------------------------------------------

std::size_t slot_coefficient_index(const CkksContext& ctx, std::size_t slots, std::size_t j) {
  if (j >= slots) throw Error(ErrorCode::IndexOutOfRange, "slot index");
  return j * (ctx.degree() / (2 * slots));
}

CkksCiphertext slot_to_coeff(const CkksCiphertext& ct, const SwitchContext& ctx,
                             MatVecStrategy strategy, MatVecStats* stats) {
  const CkksContext& ckks = ctx.ckks();
  const std::size_t n = ct.slots;
  const double kappa = static_cast<double>(ckks.prime(0).value()) / (ctx.plain_modulus() * ct.scale);
  // Column j holds the slots of the monomial at slot j's coefficient index;
  // read off the encoder so the transform shares its root ordering.
  const double unit = std::ldexp(1.0, 40);
  std::vector<std::vector<Complex>> m(n, std::vector<Complex>(n));
  for (std::size_t j = 0; j < n; ++j) {
    RnsPoly mono(ckks.degree(), ckks.basis_at(1));
    mono.at(0, slot_coefficient_index(ckks, n, j)) = static_cast<u64>(unit);
    const auto col = ckks.decode(CkksPlaintext{std::move(mono), unit, n});
    for (std::size_t k = 0; k < n; ++k) m[k][j] = kappa * col[k];
  }
  const LinearTransform lt(ckks, m, ct.level(), strategy);
  return ckks.mod_drop(lt.apply(ct, ctx.galois(), stats), 1);
}

ExtractedBatch ckks_to_lwe_batch(const CkksCiphertext& ct, const SwitchContext& ctx,
                                 MatVecStrategy strategy) {
  const CkksContext& ckks = ctx.ckks();
  CkksCiphertext c = slot_to_coeff(ct, ctx, strategy);
  if (c.b.domain() != Domain::Coeff) c.b = to_coeff(c.b);
  if (c.a.domain() != Domain::Coeff) c.a = to_coeff(c.a);
  const u64 q0 = ckks.prime(0).value();
  const std::size_t n = ckks.degree();
  ExtractedBatch out;
  out.cts.resize(ct.slots);
  parallel_for(ct.slots, ctx.workers(), [&](std::size_t j) {
    const std::size_t idx = slot_coefficient_index(ckks, ct.slots, j);
    LweCiphertext lwe;
    lwe.a.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const u64 v = i <= idx ? c.a.at(0, idx - i) : (q0 - c.a.at(0, n + idx - i)) % q0;
      lwe.a[i] = static_cast<Torus>(modulus_switch_value(v, q0, kTorusModulus));
    }
    lwe.b = static_cast<Torus>(modulus_switch_value(c.b.at(0, idx), q0, kTorusModulus));
    out.cts[j] = lwe_key_switch(lwe, ctx.bridge());
  });
  return out;
}

// ---- LUT evaluation -------------------------------------------------------

ExtractedBatch lut_eval_slot(const ExtractedBatch& batch, const LookupTable& lut,
                             const TfheContext& tfhe, const TfheKeys& keys, LutStats* stats,
                             std::size_t workers) {
  batch.dimension();
  const TfheEngine& eng = tfhe.engine();
  const std::size_t n = tfhe.params().N;
  ExtractedBatch out;
  out.cts.resize(batch.size());
  std::vector<std::size_t> gates(batch.size(), 0);
  parallel_for(batch.size(), workers, [&](std::size_t j) {
    const ScaledLwe scaled = bootstrap_prepare(batch.cts[j], lut, n);
    if (scaled.a.size() != keys.bsk.size()) {
      throw Error(ErrorCode::KeyLengthMismatch, "bootstrapping key length differs from LWE dimension");
    }
    TlweCiphertext acc = initial_accumulator(lut, scaled);
    for (std::size_t i = 0; i < keys.bsk.size(); ++i) {
      acc = eng.cmux(keys.bsk.rows[i], tlwe_monomial_mul(acc, scaled.a[i]), acc);
      ++gates[j];
    }
    out.cts[j] = lwe_key_switch(sample_extract(acc, 0), keys.ksk);
  });
  if (stats) {
    *stats = LutStats{};
    stats->mode = LutMode::Slot;
    stats->n_slot = batch.size();
    stats->n_lwe = keys.bsk.size();
    for (std::size_t g : gates) stats->cmux += g, stats->key_accesses += g;
    stats->ciphertexts_per_gate = batch.size() ? 1 : 0;
  }
  return out;
}

ExtractedBatch lut_eval_batched(const ExtractedBatch& batch, const LookupTable& lut,
                                const TfheContext& tfhe, const TfheKeys& keys, LutStats* stats) {
  batch.dimension();
  const TfheEngine& eng = tfhe.engine();
  const std::size_t n = tfhe.params().N;
  const std::size_t m = batch.size();
  LutStats st;
  st.mode = LutMode::Batched;
  st.n_slot = m;
  st.n_lwe = keys.bsk.size();
  ExtractedBatch out;
  if (m != 0) {
    std::vector<ScaledLwe> scaled(m);
    std::vector<TlweCiphertext> accs(m), diffs(m);
    for (std::size_t j = 0; j < m; ++j) {
      scaled[j] = bootstrap_prepare(batch.cts[j], lut, n);
      if (scaled[j].a.size() != keys.bsk.size()) {
        throw Error(ErrorCode::KeyLengthMismatch, "bootstrapping key length differs from LWE dimension");
      }
      accs[j] = initial_accumulator(lut, scaled[j]);
    }
    for (std::size_t i = 0; i < keys.bsk.size(); ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        diffs[j] = tlwe_sub(tlwe_monomial_mul(accs[j], scaled[j].a[i]), accs[j]);
      }
      const auto prods = eng.external_product_batch(diffs, keys.bsk.rows[i]);
      ++st.cmux, ++st.key_accesses;
      for (std::size_t j = 0; j < m; ++j) accs[j] = tlwe_add(accs[j], prods[j]);
    }
    st.ciphertexts_per_gate = m;
    out.cts.reserve(m);
    for (const auto& acc : accs) out.cts.push_back(lwe_key_switch(sample_extract(acc, 0), keys.ksk));
  }
  if (stats) *stats = st;
  return out;
}

ExtractedBatch lut_eval(const ExtractedBatch& batch, const LookupTable& lut,
                        const SwitchContext& ctx, LutMode mode, LutStats* stats) {
  return mode == LutMode::Slot
             ? lut_eval_slot(batch, lut, ctx.tfhe(), ctx.tfhe_keys(), stats, ctx.workers())
             : lut_eval_batched(batch, lut, ctx.tfhe(), ctx.tfhe_keys(), stats);
}

// ---- repack ---------------------------------------------------------------

RepackPlan build_repack_plan(const ExtractedBatch& batch, const SwitchContext& ctx,
                             MatVecStrategy strategy) {
  if (!ctx.key_ciphertext()) {
    throw Error(ErrorCode::MissingKeyCiphertext, "repack needs the CKKS encryption of the LWE key");
  }
  const CkksContext& ckks = ctx.ckks();
  const CkksCiphertext& key = *ctx.key_ciphertext();
  const std::size_t n_lwe = batch.dimension();
  if (n_lwe != ctx.n_lwe()) throw Error(ErrorCode::KeyMismatch, "batch is not under the TFHE LWE key");

  std::vector<std::vector<double>> a(batch.size(), std::vector<double>(n_lwe));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    for (std::size_t i = 0; i < n_lwe; ++i) {
      a[j][i] = -std::ldexp(static_cast<double>(torus_centered(batch.cts[j].a[i])), -32);
    }
  }
  const TiledMatrix tiled = tile_matrix(a);
  if (tiled.d != key.slots) {
    throw Error(ErrorCode::SlotCountMismatch, "tiled dimension differs from key ciphertext slots");
  }

  RepackPlan plan;
  plan.strategy = strategy;
  plan.d = tiled.d;
  plan.n_slot = batch.size();
  plan.n_lwe = n_lwe;
  plan.mode = tiled.mode;
  plan.split = bsgs_split(plan.d);
  const std::size_t d = plan.d;
  const std::size_t level = key.level();
  const double scale = plaintext_scale(ckks, level);
  const std::size_t baby = plan.split.baby;

  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> u = matrix_diagonal(tiled.m, i);
    if (strategy == MatVecStrategy::Diagonal) {
      plan.diagonals.push_back(ckks.encode(u, scale, level));
      continue;
    }
    const std::size_t shift = (i / baby) * baby;
    CkksPlaintext w = ckks.encode(rotate_left(u, d - shift), scale, level);
    if (strategy == MatVecStrategy::HRF) w = automorph(w, static_cast<std::int64_t>(shift));
    plan.diagonals.push_back(std::move(w));
  }

  // Setup-time rotations; evaluation never touches these keys.
  switch (strategy) {
    case MatVecStrategy::Diagonal:
      plan.key = key;
      break;
    case MatVecStrategy::BSGS:
      for (std::size_t b = 0; b < baby; ++b) {
        plan.bank.push_back(b == 0 ? key : ckks.hrot(key, static_cast<std::int64_t>(b), ctx.galois()));
      }
      break;
    case MatVecStrategy::HRF:
      plan.bank.push_back(key);
      for (std::size_t j = 1; j < d; ++j) plan.bank.push_back(ckks.hrot(plan.bank.back(), 1, ctx.galois()));
      break;
  }

  std::vector<double> offset(d);
  for (std::size_t k = 0; k < d; ++k) {
    offset[k] = std::ldexp(static_cast<double>(torus_centered(batch.cts[k % plan.n_slot].b)), -32);
  }
  plan.offset = ckks.encode(offset, key.scale, level - 1);
  return plan;
}

CkksCiphertext matvec(const RepackPlan& plan, MatVecStrategy strategy, const SwitchContext& ctx,
                      MatVecStats* stats) {
  if (plan.strategy != strategy) {
    throw Error(ErrorCode::StrategyPlanMismatch,
                "plan built for " + to_string(plan.strategy) + ", asked for " + to_string(strategy));
  }
  const CkksContext& ckks = ctx.ckks();
  const std::size_t d = plan.d;
  const std::size_t baby = plan.split.baby;
  const std::size_t giant = plan.split.giant;
  MatVecStats st;
  st.strategy = strategy;
  st.d = d;
  std::vector<CkksCiphertext> terms(strategy == MatVecStrategy::BSGS ? giant : d);

  switch (strategy) {
    case MatVecStrategy::Diagonal:
      parallel_for(d, ctx.workers(), [&](std::size_t i) {
        terms[i] = ckks.pmul(ckks.hrot(*plan.key, static_cast<std::int64_t>(i), ctx.galois()),
                             plan.diagonals[i]);
      });
      st.rotations = d;
      st.scalar_mults = d;
      st.rot_ciphertexts = 1;
      st.rot_keys = d;
      break;
    case MatVecStrategy::BSGS:
      parallel_for(giant, ctx.workers(), [&](std::size_t g) {
        std::vector<CkksCiphertext> inner(baby);
        for (std::size_t b = 0; b < baby; ++b) inner[b] = ckks.pmul(plan.bank[b], plan.diagonals[g * baby + b]);
        terms[g] = ckks.hrot(tree_sum(ckks, std::move(inner)), static_cast<std::int64_t>(g * baby),
                             ctx.galois());
      });
      st.rotations = giant;
      st.scalar_mults = d;
      st.rot_ciphertexts = baby;
      st.rot_keys = giant;
      break;
    case MatVecStrategy::HRF:
      parallel_for(d, ctx.workers(), [&](std::size_t i) {
        terms[i] = ckks.pmul(plan.bank[i], plan.diagonals[i]);
      });
      st.rotations = 0;
      st.scalar_mults = d;
      st.rot_ciphertexts = d;
      st.rot_keys = 0;
      break;
  }
  if (stats) *stats = st;
  CkksCiphertext out = ckks.rescale(tree_sum(ckks, std::move(terms)));
  return ckks.padd(out, plan.offset);
}

CkksCiphertext repack(const ExtractedBatch& batch, const SwitchContext& ctx,
                      MatVecStrategy strategy, MatVecStats* stats) {
  return matvec(build_repack_plan(batch, ctx, strategy), strategy, ctx, stats);
}

std::vector<std::int64_t> finish_repack(const std::vector<double>& slots, std::size_t n,
                                        unsigned plain_modulus) {
  if (n > slots.size()) throw Error(ErrorCode::IndexOutOfRange, "more outputs than slots");
  const std::int64_t p = plain_modulus;
  std::vector<std::int64_t> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::int64_t r = std::llround(slots[j] * static_cast<double>(p));
    out[j] = ((r % p) + p) % p;
  }
  return out;
}

std::int64_t signed_message(std::int64_t m, unsigned plain_modulus) {
  const std::int64_t p = plain_modulus;
  std::int64_t r = ((m % p) + p) % p;
  return r >= p / 2 ? r - p : r;
}

}  // namespace fhesw
