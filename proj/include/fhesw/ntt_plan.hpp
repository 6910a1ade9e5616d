#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fhesw/rns_poly.hpp"

namespace fhesw {

enum class NttVariant { Baseline, BD, TA };
enum class BarrierKind { Global, Local };

std::string_view to_string(NttVariant v);
std::string_view to_string(BarrierKind k);
NttVariant parse_variant(std::string_view name);

/// Fused forward stages [begin, end). Forward stage s pairs elements that
/// differ in bit log2(N) - 1 - s.
struct Superstage {
  unsigned begin = 0;
  unsigned end = 0;
  int round = -1;  // shuffle round whose layout holds the data, -1 for natural order

  unsigned width() const noexcept { return end - begin; }
};

/// Element bits [low_bit, low_bit + width) are moved to the bottom of the
/// index so that every unit touching only those bits lands in one chunk.
struct ShuffleRound {
  unsigned low_bit = 0;
  unsigned width = 0;
};

struct BarrierRecord {
  unsigned stage_begin = 0;
  unsigned stage_end = 0;
  BarrierKind kind = BarrierKind::Global;
  std::size_t chunks = 1;

  bool operator==(const BarrierRecord&) const = default;
};

struct SyncTrace {
  std::size_t global_barriers = 0;
  std::size_t local_barriers = 0;
  std::vector<BarrierRecord> log;

  void record(const BarrierRecord& r);
  std::size_t total() const noexcept { return global_barriers + local_barriers; }
  bool operator==(const SyncTrace&) const = default;
};

struct ExecutorConfig {
  enum class Mode { Serial, Pooled };

  std::size_t sms = 108;
  std::size_t workers = 1;
  Mode mode = Mode::Serial;
};

/// Schedule of one negacyclic transform of length n. barriers[k] separates
/// superstage k from superstage k + 1.
struct NttPlan {
  std::size_t n = 0;
  unsigned log_n = 0;
  NttVariant variant = NttVariant::Baseline;
  unsigned fuse = 1;
  unsigned aggregated = 0;  // R, threads folded into one (TA only)
  bool pcs = false;
  bool ossp = false;
  unsigned i1 = 0;
  unsigned i2 = 0;
  std::size_t chunks = 1;             // T
  std::size_t threads_per_block = 1;  // E
  std::size_t chunk_size = 1;         // H
  std::vector<Superstage> superstages;
  std::vector<BarrierKind> barriers;
  std::vector<ShuffleRound> rounds;

  /// Logical threads working on superstage k.
  std::size_t threads(std::size_t k) const;
  /// Complete or half butterflies one thread evaluates in superstage k.
  std::size_t work_per_thread(std::size_t k) const;

  /// Position of element j in the memory layout of superstage k.
  std::size_t position(std::size_t k, std::size_t j) const noexcept;
  std::size_t chunk_of(std::size_t k, std::size_t j) const noexcept {
    return position(k, j) / chunk_size;
  }
  /// Permutation j -> shuffled position for one shuffle round.
  std::vector<std::size_t> shuffle_map(std::size_t round) const;
  std::vector<std::size_t> unshuffle_map(std::size_t round) const;

  /// Barriers in execution order for the given direction.
  SyncTrace schedule(bool inverse = false) const;
};

NttPlan plan_baseline(std::size_t n);
NttPlan plan_bd(std::size_t n, unsigned fuse);
NttPlan plan_ta(std::size_t n, unsigned fuse);

/// Adds coefficient shuffling to the phase-1 superstages of a plan.
NttPlan apply_pcs(NttPlan plan);

/// OSSP plan with the switch point fixed at T = (2^F)^I1.
NttPlan plan_switch_point(std::size_t n, unsigned fuse, NttVariant variant, unsigned i1);

/// Switch point T = (2^F)^I1 closest to cfg.sms, restricted to T <= N / T.
NttPlan plan_ossp(std::size_t n, unsigned fuse, NttVariant variant, const ExecutorConfig& cfg);

/// Runs one transform on a single residue vector in place.
SyncTrace execute_forward(std::span<u64> a, const TwiddleTable& tw, const NttPlan& plan,
                          const ExecutorConfig& cfg);
SyncTrace execute_inverse(std::span<u64> a, const TwiddleTable& tw, const NttPlan& plan,
                          const ExecutorConfig& cfg);

std::pair<RnsPoly, SyncTrace> ntt_forward(const RnsPoly& p, const NttPlan& plan,
                                          const ExecutorConfig& cfg = {});
std::pair<RnsPoly, SyncTrace> ntt_inverse(const RnsPoly& p, const NttPlan& plan,
                                          const ExecutorConfig& cfg = {});

/// Forward for Coeff input, inverse for Eval input.
std::pair<RnsPoly, SyncTrace> execute_plan(const RnsPoly& p, const NttPlan& plan,
                                           const ExecutorConfig& cfg = {});

std::string plan_to_json(const NttPlan& plan);

}  // namespace fhesw
