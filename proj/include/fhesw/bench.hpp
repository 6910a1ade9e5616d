#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fhesw/ntt_plan.hpp"
#include "fhesw/switching.hpp"

namespace fhesw {

/// Settings shared by the CLI and the benchmark harness.
struct RunConfig {
  std::string preset = "desk";
  std::optional<std::uint64_t> seed;
  std::size_t sms = 108;
  std::size_t workers = 1;
  NttVariant ntt_variant = NttVariant::TA;
  unsigned fuse = 2;
  bool pcs = false;
  bool ossp = true;  // automated switch point unless disabled
  MatVecStrategy matvec = MatVecStrategy::HRF;
  LutMode lut_mode = LutMode::Batched;
  std::string lut = "identity";
  std::size_t n = 4096;
  std::size_t d = 16;
  std::vector<std::string> ops{"ntt", "matvec", "lut"};
  std::string out;

  /// Explicit seed, else FHESWITCH_SEED, else 0.
  std::uint64_t resolved_seed() const;
  ExecutorConfig executor() const;

  /// Applies one key=value setting; ConfigError on unknown keys or values.
  void set(std::string_view key, std::string_view value);
};

/// Plan selected by variant, fuse, pcs and ossp at length n.
NttPlan plan_from_config(const RunConfig& cfg, std::size_t n);

/// key=value lines, '#' starts a comment, blank lines ignored.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

inline constexpr int kBenchSchemaVersion = 1;

struct BenchRecord {
  std::string op;
  std::string preset;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t time_ns = 0;
  std::size_t global_syncs = 0;
  std::size_t local_syncs = 0;
  std::size_t rotations = 0;
  std::size_t scalar_mults = 0;
};

/// Header op,preset,seed,param1..paramK,time_ns,global_syncs,local_syncs,
/// rotations,scalar_mults with K the widest record; params as key=value.
std::string format_csv(const std::vector<BenchRecord>& records);
/// Throws IoError on an empty list (no file is created) or write failure.
void report_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);

/// Switching context whose repack dimension is d: n_slot = min(8, d),
/// n_lwe = d, CKKS degree max(32, 2d).
SwitchContext make_repack_context(std::size_t d, Rng& rng, std::size_t workers = 1);

std::vector<BenchRecord> bench_ntt(const RunConfig& cfg);
std::vector<BenchRecord> bench_matvec(const RunConfig& cfg);
std::vector<BenchRecord> bench_lut(const RunConfig& cfg);
std::vector<BenchRecord> run_suite(const RunConfig& cfg);

/// Every (I1, I2) switch point admissible for (n, F).
std::vector<NttPlan> sweep_plans(std::size_t n, unsigned fuse, NttVariant variant);

/// Cheap invariants (transform roundtrip, plan agreement, counter closed
/// forms). Returns the first failure, if any.
std::optional<std::string> self_check();

}  // namespace fhesw
