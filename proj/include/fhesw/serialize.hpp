#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fhesw/ckks.hpp"
#include "fhesw/switching.hpp"
#include "fhesw/tfhe.hpp"

namespace fhesw {

using Bytes = std::vector<std::uint8_t>;

/// Every blob starts with "FHSW", a u16 format version and a u16 tag, then
/// little-endian fields; arrays carry a u64 length prefix.
inline constexpr std::uint16_t kFormatVersion = 1;

enum class ObjectTag : std::uint16_t {
  CkksCiphertext = 1,
  CkksPlaintext = 2,
  CkksSecretKey = 3,
  KeySwitchKey = 4,
  GaloisKeys = 5,
  LweCiphertext = 16,
  LweKey = 17,
  TlweKey = 18,
  ExtractedBatch = 19,
  BootstrapKey = 20,
  LweKeySwitchKey = 21,
};

/// Throws FormatError on a bad header.
ObjectTag peek_tag(const Bytes& bytes);

Bytes serialize(const CkksCiphertext& ct);
Bytes serialize(const CkksPlaintext& pt);
Bytes serialize(const CkksSecretKey& sk);
Bytes serialize(const KeySwitchKey& k);
Bytes serialize(const GaloisKeys& k);
Bytes serialize(const LweCiphertext& ct);
Bytes serialize(const LweKey& k);
Bytes serialize(const TlweKey& k);
Bytes serialize(const ExtractedBatch& b);
Bytes serialize(const BootstrapKey& k);
Bytes serialize(const LweKeySwitchKey& k);

/// CKKS objects are rebound to the context's basis; ParamMismatch when the
/// stored primes differ from it.
CkksCiphertext load_ckks_ciphertext(const Bytes& bytes, const CkksContext& ctx);
CkksPlaintext load_ckks_plaintext(const Bytes& bytes, const CkksContext& ctx);
CkksSecretKey load_ckks_secret_key(const Bytes& bytes, const CkksContext& ctx);
KeySwitchKey load_key_switch_key(const Bytes& bytes, const CkksContext& ctx);
GaloisKeys load_galois_keys(const Bytes& bytes, const CkksContext& ctx);
LweCiphertext load_lwe_ciphertext(const Bytes& bytes);
LweKey load_lwe_key(const Bytes& bytes);
TlweKey load_tlwe_key(const Bytes& bytes);
ExtractedBatch load_batch(const Bytes& bytes);
BootstrapKey load_bootstrap_key(const Bytes& bytes);
LweKeySwitchKey load_keyswitch_key(const Bytes& bytes);

/// Throw IoError.
void write_file(const std::filesystem::path& path, const Bytes& bytes);
Bytes read_file(const std::filesystem::path& path);

}  // namespace fhesw
