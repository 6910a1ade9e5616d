// fhesw command-line front end. Exit codes: 0 success, 1 configuration or
// usage error, 2 invariant violation (self-check or result mismatch).

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fhesw/bench.hpp"
#include "fhesw/ntt.hpp"
#include "fhesw/serialize.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fhesw;

namespace {

struct Inputs {
  std::string config;
  std::string keys;
  std::string in;
  std::string in2;
  std::string values;
  std::string steps = "1";
  std::string scheme;
  std::int64_t k = 1;
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

const std::string& require(const std::string& v, const char* flag) {
  if (v.empty()) config_error(std::string("missing required flag ") + flag);
  return v;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      config_error("bad value '" + item + "' in --values");
    }
  }
  if (out.empty()) config_error("--values is empty");
  return out;
}

std::vector<std::int64_t> parse_steps(const std::string& text) {
  std::vector<std::int64_t> out;
  for (double v : parse_values(text)) out.push_back(static_cast<std::int64_t>(v));
  return out;
}

// Text results go to --out when given, else stdout.
void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text)) throw Error(ErrorCode::IoError, "cannot write " + cfg.out);
}

// ---- key directories ---------------------------------------------------

bool is_ckks_preset(const std::string& preset) { return preset == "desk" || preset == "switch-desk"; }

struct KeyDir {
  std::string scheme;
  std::string preset;
};

KeyDir read_key_dir(const fs::path& dir) {
  std::ifstream in(dir / "keys.cfg");
  if (!in) config_error("no key directory at " + dir.string());
  KeyDir k;
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = line.substr(0, eq);
    if (key == "scheme") k.scheme = line.substr(eq + 1);
    if (key == "preset") k.preset = line.substr(eq + 1);
  }
  if (k.scheme.empty() || k.preset.empty()) config_error("incomplete keys.cfg in " + dir.string());
  return k;
}

void cmd_keygen(const RunConfig& cfg, const Inputs& in) {
  const fs::path dir = require(cfg.out, "--out");
  std::string scheme = in.scheme.empty() ? (is_ckks_preset(cfg.preset) ? "ckks" : "tfhe") : in.scheme;
  fs::create_directories(dir);
  Rng rng(cfg.resolved_seed());
  if (scheme == "ckks") {
    const CkksContext ctx(CkksParams::preset(cfg.preset));
    const CkksSecretKey sk = ctx.keygen(rng);
    write_file(dir / "sk.bin", serialize(sk));
    write_file(dir / "rlk.bin", serialize(ctx.relin_keygen(sk, rng)));
    write_file(dir / "gk.bin", serialize(ctx.galois_keygen(sk, parse_steps(in.steps), rng)));
  } else if (scheme == "tfhe") {
    const TfheContext ctx(TfheParams::preset(cfg.preset));
    const TfheKeys keys = ctx.keygen(rng);
    write_file(dir / "lwe.bin", serialize(keys.lwe));
    write_file(dir / "tlwe.bin", serialize(keys.tlwe));
    write_file(dir / "bsk.bin", serialize(keys.bsk));
    write_file(dir / "ksk.bin", serialize(keys.ksk));
  } else {
    config_error("unknown scheme '" + scheme + "'");
  }
  std::ofstream meta(dir / "keys.cfg");
  meta << "scheme=" << scheme << "\npreset=" << cfg.preset << "\n";
  if (!meta) throw Error(ErrorCode::IoError, "cannot write keys.cfg");
}

void cmd_encrypt(const RunConfig& cfg, const Inputs& in) {
  const fs::path dir = require(in.keys, "--keys");
  const KeyDir kd = read_key_dir(dir);
  const auto values = parse_values(require(in.values, "--values"));
  Rng rng(cfg.resolved_seed());
  if (kd.scheme == "ckks") {
    const CkksContext ctx(CkksParams::preset(kd.preset));
    const CkksSecretKey sk = load_ckks_secret_key(read_file(dir / "sk.bin"), ctx);
    const std::size_t slots = ctx.params().slots;
    if (values.size() > slots) throw Error(ErrorCode::SlotCountMismatch, "more values than slots");
    std::vector<double> padded = values;
    padded.resize(slots, 0.0);
    const auto pt = ctx.encode(padded, ctx.params().scale, ctx.max_level());
    write_file(require(cfg.out, "--out"), serialize(ctx.encrypt(pt, sk, rng)));
  } else {
    const TfheContext ctx(TfheParams::preset(kd.preset));
    const LweKey key = load_lwe_key(read_file(dir / "lwe.bin"));
    ExtractedBatch batch;
    for (double v : values) batch.cts.push_back(ctx.encrypt(static_cast<std::int64_t>(v), key, rng));
    write_file(require(cfg.out, "--out"), serialize(batch));
  }
}

void cmd_decrypt(const RunConfig& cfg, const Inputs& in) {
  const fs::path dir = require(in.keys, "--keys");
  const KeyDir kd = read_key_dir(dir);
  const Bytes blob = read_file(require(in.in, "--in"));
  json out;
  if (kd.scheme == "ckks") {
    const CkksContext ctx(CkksParams::preset(kd.preset));
    const CkksSecretKey sk = load_ckks_secret_key(read_file(dir / "sk.bin"), ctx);
    const auto slots = ctx.decode(ctx.decrypt(load_ckks_ciphertext(blob, ctx), sk));
    out["values"] = json::array();
    for (const auto& z : slots) out["values"].push_back(z.real());
  } else {
    const TfheContext ctx(TfheParams::preset(kd.preset));
    const LweKey key = load_lwe_key(read_file(dir / "lwe.bin"));
    out["messages"] = json::array();
    for (const auto& ct : load_batch(blob).cts) out["messages"].push_back(ctx.decrypt(ct, key));
  }
  emit(cfg, out.dump(2) + "\n");
}

void cmd_eval(const RunConfig& cfg, const Inputs& in, const std::string& op) {
  const fs::path dir = require(in.keys, "--keys");
  const KeyDir kd = read_key_dir(dir);
  const Bytes a_blob = read_file(require(in.in, "--in"));
  const std::string& out = require(cfg.out, "--out");
  if (kd.scheme == "tfhe") {
    if (op != "add") config_error("only 'eval add' is defined for TFHE ciphertexts");
    const auto x = load_batch(a_blob);
    const auto y = load_batch(read_file(require(in.in2, "--in2")));
    if (x.size() != y.size()) throw Error(ErrorCode::ParamMismatch, "batch sizes differ");
    ExtractedBatch z;
    for (std::size_t i = 0; i < x.size(); ++i) z.cts.push_back(lwe_add(x.cts[i], y.cts[i]));
    write_file(out, serialize(z));
    return;
  }
  const CkksContext ctx(CkksParams::preset(kd.preset));
  const CkksCiphertext x = load_ckks_ciphertext(a_blob, ctx);
  CkksCiphertext z;
  if (op == "add") {
    z = ctx.hadd(x, load_ckks_ciphertext(read_file(require(in.in2, "--in2")), ctx));
  } else if (op == "mul") {
    const auto y = load_ckks_ciphertext(read_file(require(in.in2, "--in2")), ctx);
    const auto rlk = load_key_switch_key(read_file(dir / "rlk.bin"), ctx);
    z = ctx.rescale(ctx.hmul(x, y, rlk));
  } else {
    z = ctx.hrot(x, in.k, load_galois_keys(read_file(dir / "gk.bin"), ctx));
  }
  write_file(out, serialize(z));
}

// ---- switching -----------------------------------------------------------

// Keys are regenerated from the seed so separate switch invocations agree.
SwitchContext switch_context(const RunConfig& cfg) {
  SwitchConfig sc;
  sc.tfhe_preset = cfg.preset;
  sc.workers = cfg.workers;
  Rng key_rng = Rng(cfg.resolved_seed()).fork(1);
  return SwitchContext(sc, key_rng);
}

std::vector<double> switch_values(const RunConfig& cfg, const Inputs& in, const SwitchContext& ctx) {
  if (!in.values.empty()) return parse_values(in.values);
  Rng data = Rng(cfg.resolved_seed()).fork(2);
  std::vector<double> v(ctx.n_slot());
  const bool sign = cfg.lut == "sign";
  for (auto& x : v) {
    const auto r = static_cast<double>(data.uniform(16));
    x = sign ? r - 8 : r;
  }
  return v;
}

LookupTable switch_lut(const RunConfig& cfg, const SwitchContext& ctx) {
  return cfg.lut == "sign" ? ctx.tfhe().sign_lut() : ctx.tfhe().identity_lut();
}

json batch_messages(const ExtractedBatch& b, const SwitchContext& ctx) {
  json out = json::array();
  for (const auto& ct : b.cts)
    out.push_back(signed_message(ctx.tfhe().decrypt(ct, ctx.tfhe_keys().lwe), ctx.plain_modulus()));
  return out;
}

std::vector<std::int64_t> finished(const CkksCiphertext& ct, const SwitchContext& ctx, std::size_t n) {
  auto out = finish_repack(ctx.decrypt_slots(ct), n, ctx.plain_modulus());
  for (auto& m : out) m = signed_message(m, ctx.plain_modulus());
  return out;
}

void cmd_switch(const RunConfig& cfg, const Inputs& in, const std::string& op) {
  const SwitchContext ctx = switch_context(cfg);
  Rng data = Rng(cfg.resolved_seed()).fork(3);
  json out;
  if (op == "extract") {
    const auto values = switch_values(cfg, in, ctx);
    // slot-to-coefficient has no HRF form
    const auto strategy = cfg.matvec == MatVecStrategy::HRF ? MatVecStrategy::Diagonal : cfg.matvec;
    const auto batch = ckks_to_lwe_batch(ctx.encrypt_slots(values, data), ctx, strategy);
    write_file(require(cfg.out, "--out"), serialize(batch));
    out["messages"] = batch_messages(batch, ctx);
    std::cout << out.dump(2) << "\n";
  } else if (op == "lut") {
    const auto batch = load_batch(read_file(require(in.in, "--in")));
    LutStats stats;
    const auto looked = lut_eval(batch, switch_lut(cfg, ctx), ctx, cfg.lut_mode, &stats);
    write_file(require(cfg.out, "--out"), serialize(looked));
    out["messages"] = batch_messages(looked, ctx);
    out["stats"] = json::parse(stats.to_json());
    std::cout << out.dump(2) << "\n";
  } else if (op == "repack") {
    const auto batch = load_batch(read_file(require(in.in, "--in")));
    MatVecStats stats;
    const auto ct = repack(batch, ctx, cfg.matvec, &stats);
    write_file(require(cfg.out, "--out"), serialize(ct));
    out["messages"] = finished(ct, ctx, batch.size());
    out["stats"] = json::parse(stats.to_json());
    std::cout << out.dump(2) << "\n";
  } else {
    const auto values = switch_values(cfg, in, ctx);
    const auto batch = ckks_to_lwe_batch(ctx.encrypt_slots(values, data), ctx);
    LutStats lut_stats;
    const auto looked = lut_eval(batch, switch_lut(cfg, ctx), ctx, cfg.lut_mode, &lut_stats);
    MatVecStats mv_stats;
    const auto result = finished(repack(looked, ctx, cfg.matvec, &mv_stats), ctx, values.size());
    std::vector<std::int64_t> expected;
    for (double v : values)
      expected.push_back(cfg.lut == "sign" ? (v >= 0 ? 1 : -1) : static_cast<std::int64_t>(std::llround(v)));
    out["preset"] = cfg.preset;
    out["seed"] = cfg.resolved_seed();
    out["lut"] = cfg.lut;
    out["lut_mode"] = to_string(cfg.lut_mode);
    out["matvec"] = to_string(cfg.matvec);
    out["input"] = values;
    out["extracted"] = batch_messages(batch, ctx);
    out["looked_up"] = batch_messages(looked, ctx);
    out["result"] = result;
    out["expected"] = expected;
    out["ok"] = result == expected;
    out["lut_stats"] = json::parse(lut_stats.to_json());
    out["matvec_stats"] = json::parse(mv_stats.to_json());
    emit(cfg, out.dump(2) + "\n");
    if (result != expected) throw Error(ErrorCode::InvariantViolation, "roundtrip result differs from f(v)");
  }
}

// ---- ntt and bench -----------------------------------------------------------

void run_self_check() {
  if (const auto failure = self_check()) throw Error(ErrorCode::InvariantViolation, "self-check: " + *failure);
}

void cmd_ntt(const RunConfig& cfg, const std::string& op) {
  if (!is_pow2(cfg.n) || cfg.n < 4) config_error("--n must be a power of two >= 4");
  if (op == "plan") {
    emit(cfg, plan_to_json(plan_from_config(cfg, cfg.n)) + "\n");
    return;
  }
  const Modulus q(generate_ntt_primes(60, 1, cfg.n).front(), cfg.n);
  Rng rng(cfg.resolved_seed());
  std::vector<u64> input(cfg.n);
  for (auto& x : input) x = rng.uniform(q.value());
  std::vector<u64> want = input;
  ntt_forward_reference(want, q.twiddles());

  if (op == "run") {
    const NttPlan plan = plan_from_config(cfg, cfg.n);
    std::vector<u64> a = input;
    const SyncTrace t = execute_forward(a, q.twiddles(), plan, cfg.executor());
    const bool forward_ok = a == want;
    execute_inverse(a, q.twiddles(), plan, cfg.executor());
    const bool roundtrip_ok = a == input;
    json out = json::parse(plan_to_json(plan));
    out.erase("barriers");
    out["global_syncs"] = t.global_barriers;
    out["local_syncs"] = t.local_barriers;
    out["matches_reference"] = forward_ok;
    out["inverse_roundtrip"] = roundtrip_ok;
    emit(cfg, out.dump(2) + "\n");
    if (!forward_ok || !roundtrip_ok) throw Error(ErrorCode::InvariantViolation, "plan disagrees with reference");
    return;
  }

  run_self_check();
  std::vector<BenchRecord> records;
  for (const NttPlan& plan : sweep_plans(cfg.n, cfg.fuse, cfg.ntt_variant)) {
    std::vector<u64> a = input;
    const auto t0 = std::chrono::steady_clock::now();
    const SyncTrace t = execute_forward(a, q.twiddles(), plan, cfg.executor());
    const auto t1 = std::chrono::steady_clock::now();
    if (a != want) throw Error(ErrorCode::InvariantViolation, "sweep plan disagrees with reference");
    BenchRecord r;
    r.op = "ntt-sweep";
    r.preset = cfg.preset;
    r.seed = cfg.resolved_seed();
    r.params = {{"n", std::to_string(plan.n)},
                {"variant", std::string(to_string(plan.variant))},
                {"F", std::to_string(plan.fuse)},
                {"I1", std::to_string(plan.i1)},
                {"I2", std::to_string(plan.i2)},
                {"T", std::to_string(plan.chunks)}};
    r.time_ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    r.global_syncs = t.global_barriers;
    r.local_syncs = t.local_barriers;
    records.push_back(std::move(r));
  }
  if (cfg.out.empty())
    std::cout << format_csv(records);
  else
    report_csv(records, cfg.out);
}

void cmd_bench(const RunConfig& cfg) {
  run_self_check();
  const auto records = run_suite(cfg);
  if (cfg.out.empty())
    std::cout << format_csv(records);
  else
    report_csv(records, cfg.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fhesw: CKKS/TFHE scheme switching and NTT plan tooling"};
  app.require_subcommand(1);
  app.fallthrough();

  Inputs in;
  std::map<std::string, std::string> flags;
  const auto opt = [&](const std::string& names, const std::string& key, const std::string& help) {
    app.add_option(names, flags[key], help);
  };
  opt("--preset", "preset", "parameter preset");
  opt("--seed", "seed", "RNG seed (falls back to FHESWITCH_SEED)");
  opt("--sms", "sms", "streaming multiprocessors S");
  opt("--workers", "workers", "worker threads W");
  opt("--ntt-variant", "ntt-variant", "baseline|bd|ta");
  opt("--fuse,--f", "fuse", "stages fused per kernel F");
  opt("--matvec", "matvec", "diag|bsgs|hrf");
  opt("--lut-mode", "lut-mode", "slot|batched");
  opt("--lut", "lut", "identity|sign");
  opt("--n", "n", "transform length");
  opt("--d", "d", "repack dimension");
  opt("--ops", "ops", "comma-separated benchmark ops");
  opt("--out", "out", "output path");
  std::optional<bool> pcs, ossp;
  app.add_flag("--pcs,!--no-pcs", pcs, "coefficient shuffling");
  app.add_flag("--ossp,!--no-ossp", ossp, "automatic switch point (default on)");
  app.add_option("--config", in.config, "key=value config file");
  app.add_option("--keys", in.keys, "key directory");
  app.add_option("--in", in.in, "input file");
  app.add_option("--in2", in.in2, "second input file");
  app.add_option("--values", in.values, "comma-separated values");
  app.add_option("--steps", in.steps, "rotation steps for keygen");
  app.add_option("--scheme", in.scheme, "ckks|tfhe for keygen");
  app.add_option("--k", in.k, "rotation step");

  auto* keygen = app.add_subcommand("keygen", "generate a key directory");
  auto* encrypt = app.add_subcommand("encrypt", "encrypt values");
  auto* decrypt = app.add_subcommand("decrypt", "decrypt a ciphertext");
  auto* eval = app.add_subcommand("eval", "homomorphic evaluation");
  eval->require_subcommand(1);
  for (const char* n : {"add", "mul", "rot"}) eval->add_subcommand(n);
  auto* sw = app.add_subcommand("switch", "scheme switching");
  sw->require_subcommand(1);
  for (const char* n : {"extract", "lut", "repack", "roundtrip"}) sw->add_subcommand(n);
  auto* ntt = app.add_subcommand("ntt", "NTT plans");
  ntt->require_subcommand(1);
  for (const char* n : {"plan", "run", "sweep"}) ntt->add_subcommand(n);
  auto* bench = app.add_subcommand("bench", "benchmarks");
  bench->require_subcommand(1);
  bench->add_subcommand("suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto leaf = [](CLI::App* parent) {
    for (auto* s : parent->get_subcommands()) return s->get_name();
    return std::string{};
  };

  try {
    RunConfig cfg = in.config.empty() ? RunConfig{} : load_config(in.config);
    for (const auto& [key, value] : flags)
      if (app.get_option("--" + key)->count() > 0) cfg.set(key, value);
    if (pcs) cfg.pcs = *pcs;
    if (ossp) cfg.ossp = *ossp;

    if (keygen->parsed()) cmd_keygen(cfg, in);
    else if (encrypt->parsed()) cmd_encrypt(cfg, in);
    else if (decrypt->parsed()) cmd_decrypt(cfg, in);
    else if (eval->parsed()) cmd_eval(cfg, in, leaf(eval));
    else if (sw->parsed()) cmd_switch(cfg, in, leaf(sw));
    else if (ntt->parsed()) cmd_ntt(cfg, leaf(ntt));
    else if (bench->parsed()) cmd_bench(cfg);
  } catch (const Error& e) {
    std::cerr << "fhesw: " << e.what() << "\n";
    return e.code() == ErrorCode::InvariantViolation ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "fhesw: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
