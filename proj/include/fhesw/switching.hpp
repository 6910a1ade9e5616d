#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fhesw/ckks.hpp"
#include "fhesw/tfhe.hpp"

namespace fhesw {

enum class MatVecStrategy { Diagonal, BSGS, HRF };

std::string to_string(MatVecStrategy s);
/// "diag", "bsgs" or "hrf".
MatVecStrategy parse_matvec(std::string_view name);

struct MatVecStats {
  MatVecStrategy strategy = MatVecStrategy::Diagonal;
  std::size_t d = 0;
  std::size_t rotations = 0;        // homomorphic rotations during evaluation
  std::size_t scalar_mults = 0;     // plaintext-ciphertext products
  std::size_t rot_ciphertexts = 0;  // rotated ciphertexts held by the plan
  std::size_t rot_keys = 0;         // Galois keys the evaluation needs

  std::string to_json() const;
};

enum class LutMode { Slot, Batched };

std::string to_string(LutMode m);
/// "slot" or "batched".
LutMode parse_lut_mode(std::string_view name);

struct LutStats {
  LutMode mode = LutMode::Slot;
  std::size_t n_slot = 0;
  std::size_t n_lwe = 0;
  std::size_t cmux = 0;          // CMux gates executed (a batched gate counts once)
  std::size_t key_accesses = 0;  // bootstrapping-key rows read
  std::size_t ciphertexts_per_gate = 0;

  std::string to_json() const;
};

/// Giant/baby split with giant * baby = d: equal halves for even log d,
/// otherwise giant = 2^ceil(log2 sqrt d).
struct BsgsSplit {
  std::size_t giant = 1;
  std::size_t baby = 1;
};
BsgsSplit bsgs_split(std::size_t d);

enum class TilingMode { Identity, RowTiling, ColumnTiling };

std::string to_string(TilingMode m);

/// Square system whose clear MatVec reproduces A*s in rows [0, rows).
struct TiledMatrix {
  std::vector<std::vector<double>> m;  // d x d
  TilingMode mode = TilingMode::Identity;
  std::size_t rows = 0;  // n_slot
  std::size_t cols = 0;  // n_lwe
  std::size_t d = 0;
};

/// Throws NonPowerOfTwoDims.
TiledMatrix tile_matrix(const std::vector<std::vector<double>>& a);

/// Key zero-extended to the tiled width.
std::vector<double> tile_key(const std::vector<double>& s, const TiledMatrix& t);

/// m[k][(k + i) mod d] for k < d.
std::vector<double> matrix_diagonal(const std::vector<std::vector<double>>& m, std::size_t i);

/// Homomorphic-friendly linear map on the d slots of one ciphertext.
class LinearTransform {
 public:
  /// Diagonal or BSGS over a complex d x d matrix, plaintexts encoded at
  /// `level` with scale equal to that level's last prime.
  LinearTransform(const CkksContext& ctx, const std::vector<std::vector<Complex>>& m,
                  std::size_t level, MatVecStrategy strategy);

  MatVecStrategy strategy() const noexcept { return strategy_; }
  std::size_t dimension() const noexcept { return d_; }

  /// One level consumed. Rotations of x are taken at evaluation time.
  CkksCiphertext apply(const CkksCiphertext& x, const GaloisKeys& keys, MatVecStats* stats) const;

 private:
  const CkksContext* ctx_;
  MatVecStrategy strategy_;
  std::size_t d_;
  BsgsSplit split_;
  std::vector<CkksPlaintext> diagonals_;
};

struct ExtractedBatch {
  std::vector<LweCiphertext> cts;

  std::size_t size() const noexcept { return cts.size(); }
  /// Throws NonUniformBatch when dimensions differ.
  std::size_t dimension() const;
};

struct SwitchConfig {
  std::string ckks_preset = "switch-desk";
  std::string tfhe_preset = "desk";
  std::size_t workers = 1;
};

/// CKKS and TFHE keys linked by the bridging key switch, plus the CKKS
/// encryption of the TFHE LWE key used by repack.
class SwitchContext {
 public:
  SwitchContext(const SwitchConfig& cfg, Rng& rng);
  SwitchContext(CkksParams ckks, TfheParams tfhe, std::size_t workers, Rng& rng);

  const CkksContext& ckks() const noexcept { return ckks_; }
  const TfheContext& tfhe() const noexcept { return tfhe_; }
  const CkksSecretKey& ckks_key() const noexcept { return ckks_sk_; }
  const TfheKeys& tfhe_keys() const noexcept { return tfhe_keys_; }
  const LweKeySwitchKey& bridge() const noexcept { return bridge_; }
  const GaloisKeys& galois() const noexcept { return galois_; }
  const std::optional<CkksCiphertext>& key_ciphertext() const noexcept { return key_ct_; }
  void drop_key_ciphertext() { key_ct_.reset(); }

  std::size_t n_slot() const noexcept { return ckks_.params().slots; }
  std::size_t n_lwe() const noexcept { return tfhe_.params().n_lwe; }
  /// max(n_slot, n_lwe): slot count of the key ciphertext.
  std::size_t repack_dim() const noexcept { return std::max(n_slot(), n_lwe()); }
  unsigned plain_modulus() const noexcept { return tfhe_.params().plain_modulus; }
  std::size_t workers() const noexcept { return workers_; }

  /// Integer messages in [-p/2, p/2) into n_slot slots. Throws
  /// AlphabetOverflow on values outside the TFHE message range.
  CkksCiphertext encrypt_slots(const std::vector<double>& values, Rng& rng) const;
  std::vector<double> decrypt_slots(const CkksCiphertext& ct) const;

 private:
  CkksContext ckks_;
  TfheContext tfhe_;
  CkksSecretKey ckks_sk_;
  TfheKeys tfhe_keys_;
  LweKeySwitchKey bridge_;
  GaloisKeys galois_;
  std::optional<CkksCiphertext> key_ct_;
  std::size_t workers_;
};

/// Coefficient index that slot j lands on after slot-to-coefficient.
std::size_t slot_coefficient_index(const CkksContext& ctx, std::size_t slots, std::size_t j);

/// Moves slot values v_j to coefficients q_0 * v_j / p and drops to q_0.
/// HRF is not available here since the input is not the key ciphertext.
CkksCiphertext slot_to_coeff(const CkksCiphertext& ct, const SwitchContext& ctx,
                             MatVecStrategy strategy = MatVecStrategy::Diagonal,
                             MatVecStats* stats = nullptr);

/// slot_to_coeff, sample extraction mod q_0, switch to 2^32, bridging key
/// switch to the TFHE LWE key.
ExtractedBatch ckks_to_lwe_batch(const CkksCiphertext& ct, const SwitchContext& ctx,
                                 MatVecStrategy strategy = MatVecStrategy::Diagonal);

/// One programmable bootstrap per ciphertext, in turn.
ExtractedBatch lut_eval_slot(const ExtractedBatch& batch, const LookupTable& lut,
                             const TfheContext& tfhe, const TfheKeys& keys,
                             LutStats* stats = nullptr, std::size_t workers = 1);

/// One batched CMux per key row across all accumulators.
ExtractedBatch lut_eval_batched(const ExtractedBatch& batch, const LookupTable& lut,
                                const TfheContext& tfhe, const TfheKeys& keys,
                                LutStats* stats = nullptr);

ExtractedBatch lut_eval(const ExtractedBatch& batch, const LookupTable& lut,
                        const SwitchContext& ctx, LutMode mode, LutStats* stats = nullptr);

struct RepackPlan {
  MatVecStrategy strategy = MatVecStrategy::Diagonal;
  std::size_t d = 0;
  std::size_t n_slot = 0;
  std::size_t n_lwe = 0;
  TilingMode mode = TilingMode::Identity;
  BsgsSplit split;
  /// Diagonal: u_i. BSGS: u_{g,b} pre-rotated by -g*baby. HRF: sigma_g applied
  /// back onto the BSGS diagonals.
  std::vector<CkksPlaintext> diagonals;
  /// BSGS: baby-step rotations of Enc(s). HRF: rot_j(Enc(s)) for j < d.
  std::vector<CkksCiphertext> bank;
  std::optional<CkksCiphertext> key;  // Diagonal only
  CkksPlaintext offset;               // centered b_j / q on every tiled row
};

/// Throws MissingKeyCiphertext when ctx holds no Enc(s).
RepackPlan build_repack_plan(const ExtractedBatch& batch, const SwitchContext& ctx,
                             MatVecStrategy strategy);

/// b - A*s in slots (A*s + b with A = -a/q). Throws StrategyPlanMismatch.
CkksCiphertext matvec(const RepackPlan& plan, MatVecStrategy strategy, const SwitchContext& ctx,
                      MatVecStats* stats = nullptr);

/// build_repack_plan + matvec. Slot j holds (b_j - <a_j, s>) / q up to an
/// integer.
CkksCiphertext repack(const ExtractedBatch& batch, const SwitchContext& ctx,
                      MatVecStrategy strategy = MatVecStrategy::HRF, MatVecStats* stats = nullptr);

/// Clear mod-q step: round(p * x) mod p for each of the first n slots.
std::vector<std::int64_t> finish_repack(const std::vector<double>& slots, std::size_t n,
                                        unsigned plain_modulus);

/// Representative of m mod p in [-p/2, p/2).
std::int64_t signed_message(std::int64_t m, unsigned plain_modulus);

}  // namespace fhesw
