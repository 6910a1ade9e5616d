#include "fhesw/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fhesw/ntt.hpp"

namespace fhesw {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
    throw Error(ErrorCode::ConfigError,
                "'" + std::string(key) + "' expects an unsigned integer, got '" + std::string(v) + "'");
  return out;
}

std::size_t parse_positive(std::string_view key, std::string_view v) {
  const auto x = parse_u64(key, v);
  if (x == 0) throw Error(ErrorCode::ConfigError, "'" + std::string(key) + "' must be positive");
  return static_cast<std::size_t>(x);
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw Error(ErrorCode::ConfigError,
              "'" + std::string(key) + "' expects a boolean, got '" + std::string(v) + "'");
}

// Library parsers raise their own codes; a bad config value is a ConfigError.
template <class F>
auto as_config(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, "bad value for '" + std::string(key) + "': " + e.what());
  }
}

template <class F>
std::uint64_t time_ns(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

ExtractedBatch random_batch(const TfheContext& tfhe, const LweKey& key, std::size_t count,
                            Rng& rng) {
  ExtractedBatch batch;
  const unsigned alphabet = tfhe.params().alphabet();
  for (std::size_t i = 0; i < count; ++i)
    batch.cts.push_back(tfhe.encrypt(static_cast<unsigned>(rng.uniform(alphabet)), key, rng));
  return batch;
}

}  // namespace

std::uint64_t RunConfig::resolved_seed() const {
  if (seed) return *seed;
  if (const char* env = std::getenv("FHESWITCH_SEED"); env && *env)
    return parse_u64("FHESWITCH_SEED", trim(env));
  return 0;
}

ExecutorConfig RunConfig::executor() const {
  ExecutorConfig e;
  e.sms = sms;
  e.workers = workers;
  e.mode = workers > 1 ? ExecutorConfig::Mode::Pooled : ExecutorConfig::Mode::Serial;
  return e;
}

void RunConfig::set(std::string_view raw_key, std::string_view raw_value) {
  std::string key(trim(raw_key));
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string_view v = trim(raw_value);
  if (key == "preset") {
    if (v.empty()) throw Error(ErrorCode::ConfigError, "empty preset");
    preset = v;
  } else if (key == "seed") {
    seed = parse_u64(key, v);
  } else if (key == "sms") {
    sms = parse_positive(key, v);
  } else if (key == "workers") {
    workers = parse_positive(key, v);
  } else if (key == "ntt-variant") {
    ntt_variant = as_config(key, [&] { return parse_variant(v); });
  } else if (key == "fuse" || key == "f") {
    fuse = static_cast<unsigned>(parse_positive(key, v));
  } else if (key == "pcs") {
    pcs = parse_bool(key, v);
  } else if (key == "ossp") {
    ossp = parse_bool(key, v);
  } else if (key == "matvec") {
    matvec = as_config(key, [&] { return parse_matvec(v); });
  } else if (key == "lut-mode") {
    lut_mode = as_config(key, [&] { return parse_lut_mode(v); });
  } else if (key == "lut") {
    if (v != "identity" && v != "sign")
      throw Error(ErrorCode::ConfigError, "unknown lut '" + std::string(v) + "'");
    lut = v;
  } else if (key == "n") {
    n = parse_positive(key, v);
  } else if (key == "d") {
    d = parse_positive(key, v);
  } else if (key == "ops") {
    std::vector<std::string> list;
    std::string_view rest = v;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      if (item != "ntt" && item != "matvec" && item != "lut")
        throw Error(ErrorCode::ConfigError, "unknown op '" + std::string(item) + "'");
      list.emplace_back(item);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (list.empty()) throw Error(ErrorCode::ConfigError, "empty op list");
    ops = std::move(list);
  } else if (key == "out") {
    out = v;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");
    base.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

NttPlan plan_from_config(const RunConfig& cfg, std::size_t n) {
  NttPlan plan;
  if (cfg.ossp) {
    plan = plan_ossp(n, cfg.fuse, cfg.ntt_variant, cfg.executor());
  } else {
    switch (cfg.ntt_variant) {
      case NttVariant::Baseline: plan = plan_baseline(n); break;
      case NttVariant::BD: plan = plan_bd(n, cfg.fuse); break;
      case NttVariant::TA: plan = plan_ta(n, cfg.fuse); break;
    }
  }
  return cfg.pcs ? apply_pcs(std::move(plan)) : plan;
}

std::string format_csv(const std::vector<BenchRecord>& records) {
  std::size_t k = 0;
  for (const auto& r : records) k = std::max(k, r.params.size());
  std::ostringstream os;
  os << "op,preset,seed";
  for (std::size_t i = 1; i <= k; ++i) os << ",param" << i;
  os << ",time_ns,global_syncs,local_syncs,rotations,scalar_mults\n";
  for (const auto& r : records) {
    os << r.op << ',' << r.preset << ',' << r.seed;
    for (std::size_t i = 0; i < k; ++i) {
      os << ',';
      if (i < r.params.size()) os << r.params[i].first << '=' << r.params[i].second;
    }
    os << ',' << r.time_ns << ',' << r.global_syncs << ',' << r.local_syncs << ',' << r.rotations
       << ',' << r.scalar_mults << '\n';
  }
  return os.str();
}

void report_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw Error(ErrorCode::IoError, "no benchmark records to write");
  const std::string text = format_csv(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

SwitchContext make_repack_context(std::size_t d, Rng& rng, std::size_t workers) {
  if (!is_pow2(d)) throw Error(ErrorCode::NonPowerOfTwoDims, "repack dimension must be a power of two");
  CkksParams ckks = CkksParams::preset("switch-desk");
  ckks.name = "repack-" + std::to_string(d);
  ckks.n = std::max<std::size_t>(32, 2 * d);
  ckks.slots = std::min<std::size_t>(8, d);
  TfheParams tfhe = TfheParams::preset("desk");
  tfhe.n_lwe = d;
  return SwitchContext(std::move(ckks), std::move(tfhe), workers, rng);
}

std::vector<BenchRecord> bench_ntt(const RunConfig& cfg) {
  if (!is_pow2(cfg.n) || cfg.n < 4) throw Error(ErrorCode::ConfigError, "n must be a power of two >= 4");
  const std::uint64_t seed = cfg.resolved_seed();
  const Modulus q(generate_ntt_primes(60, 1, cfg.n).front(), cfg.n);
  Rng rng(seed);
  std::vector<u64> input(cfg.n);
  for (auto& x : input) x = rng.uniform(q.value());

  std::vector<NttPlan> plans{plan_baseline(cfg.n)};
  const NttPlan chosen = plan_from_config(cfg, cfg.n);
  if (!(chosen.variant == NttVariant::Baseline && !chosen.pcs && !chosen.ossp)) plans.push_back(chosen);

  std::vector<BenchRecord> out;
  for (const auto& plan : plans) {
    std::vector<u64> a = input;
    SyncTrace trace;
    const auto ns = time_ns([&] { trace = execute_forward(a, q.twiddles(), plan, cfg.executor()); });
    BenchRecord r;
    r.op = "ntt";
    r.preset = cfg.preset;
    r.seed = seed;
    r.params = {{"n", std::to_string(plan.n)},
                {"variant", std::string(to_string(plan.variant))},
                {"F", std::to_string(plan.fuse)},
                {"pcs", bool_str(plan.pcs)},
                {"ossp", bool_str(plan.ossp)},
                {"T", std::to_string(plan.chunks)}};
    r.time_ns = ns;
    r.global_syncs = trace.global_barriers;
    r.local_syncs = trace.local_barriers;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<BenchRecord> bench_matvec(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.resolved_seed();
  Rng rng(seed);
  const SwitchContext ctx = make_repack_context(cfg.d, rng, cfg.workers);
  const ExtractedBatch batch = random_batch(ctx.tfhe(), ctx.tfhe_keys().lwe, ctx.n_slot(), rng);

  std::vector<BenchRecord> out;
  for (const auto s : {MatVecStrategy::Diagonal, MatVecStrategy::BSGS, MatVecStrategy::HRF}) {
    const RepackPlan plan = build_repack_plan(batch, ctx, s);
    MatVecStats stats;
    const auto ns = time_ns([&] { (void)matvec(plan, s, ctx, &stats); });
    BenchRecord r;
    r.op = "matvec";
    r.preset = cfg.preset;
    r.seed = seed;
    r.params = {{"strategy", to_string(s)},
                {"d", std::to_string(stats.d)},
                {"rot_ciphertexts", std::to_string(stats.rot_ciphertexts)},
                {"rot_keys", std::to_string(stats.rot_keys)}};
    r.time_ns = ns;
    r.rotations = stats.rotations;
    r.scalar_mults = stats.scalar_mults;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<BenchRecord> bench_lut(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.resolved_seed();
  Rng rng(seed);
  const TfheContext tfhe(as_config("preset", [&] { return TfheParams::preset(cfg.preset); }));
  const TfheKeys keys = tfhe.keygen(rng);
  const std::size_t n_slot = std::min<std::size_t>(8, cfg.d);
  const ExtractedBatch batch = random_batch(tfhe, keys.lwe, n_slot, rng);
  const LookupTable lut = cfg.lut == "sign" ? tfhe.sign_lut() : tfhe.identity_lut();

  std::vector<BenchRecord> out;
  for (const auto mode : {LutMode::Slot, LutMode::Batched}) {
    LutStats stats;
    const auto ns = time_ns([&] {
      if (mode == LutMode::Slot)
        (void)lut_eval_slot(batch, lut, tfhe, keys, &stats, cfg.workers);
      else
        (void)lut_eval_batched(batch, lut, tfhe, keys, &stats);
    });
    BenchRecord r;
    r.op = "lut";
    r.preset = cfg.preset;
    r.seed = seed;
    r.params = {{"mode", to_string(mode)},
                {"n_slot", std::to_string(stats.n_slot)},
                {"n_lwe", std::to_string(stats.n_lwe)},
                {"cmux", std::to_string(stats.cmux)},
                {"key_accesses", std::to_string(stats.key_accesses)},
                {"cts_per_gate", std::to_string(stats.ciphertexts_per_gate)}};
    r.time_ns = ns;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<BenchRecord> run_suite(const RunConfig& cfg) {
  std::vector<BenchRecord> out;
  for (const auto& op : cfg.ops) {
    std::vector<BenchRecord> part;
    if (op == "ntt")
      part = bench_ntt(cfg);
    else if (op == "matvec")
      part = bench_matvec(cfg);
    else if (op == "lut")
      part = bench_lut(cfg);
    else
      throw Error(ErrorCode::ConfigError, "unknown op '" + op + "'");
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<NttPlan> sweep_plans(std::size_t n, unsigned fuse, NttVariant variant) {
  if (!is_pow2(n) || fuse == 0) throw Error(ErrorCode::InvalidArgument, "bad sweep shape");
  const unsigned log_n = log2_exact(n);
  std::vector<NttPlan> out;
  for (unsigned i1 = 0; 2 * fuse * i1 <= log_n; ++i1) out.push_back(plan_switch_point(n, fuse, variant, i1));
  return out;
}

std::optional<std::string> self_check() {
  try {
    constexpr std::size_t n = 1024;
    const Modulus q(generate_ntt_primes(50, 1, n).front(), n);
    Rng rng(1);
    std::vector<u64> input(n);
    for (auto& x : input) x = rng.uniform(q.value());
    std::vector<u64> want = input;
    ntt_forward_reference(want, q.twiddles());

    const ExecutorConfig exec;
    for (const auto& plan : {plan_baseline(n), plan_bd(n, 2), apply_pcs(plan_ta(n, 2)),
                             plan_ossp(n, 2, NttVariant::TA, exec)}) {
      std::vector<u64> a = input;
      execute_forward(a, q.twiddles(), plan, exec);
      if (a != want) return "forward transform disagrees with reference for " + std::string(to_string(plan.variant));
      execute_inverse(a, q.twiddles(), plan, exec);
      if (a != input) return "inverse transform does not undo forward for " + std::string(to_string(plan.variant));
    }
    if (plan_baseline(n).schedule().total() != 9) return "baseline barrier count";

    const auto split = bsgs_split(16);
    if (split.baby * split.giant != 16 || split.giant != 4) return "bsgs split for d=16";
  } catch (const Error& e) {
    return std::string("self-check raised ") + e.what();
  }
  return std::nullopt;
}

}  // namespace fhesw
