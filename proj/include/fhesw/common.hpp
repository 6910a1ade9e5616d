#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fhesw {

enum class ErrorCode {
  DomainMismatch,
  BasisMismatch,
  DegreeMismatch,
  PlanMismatch,
  InvalidF,
  InvalidArgument,
  LevelMismatch,
  ScaleMismatch,
  InsufficientLevel,
  MissingGaloisKey,
  SlotCountMismatch,
  ParamMismatch,
  KeyLengthMismatch,
  IndexOutOfRange,
  KeyMismatch,
  NonUniformBatch,
  NonPowerOfTwoDims,
  MissingKeyCiphertext,
  StrategyPlanMismatch,
  AlphabetOverflow,
  ConfigError,
  IoError,
  FormatError,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

constexpr bool is_pow2(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

constexpr unsigned log2_exact(std::uint64_t x) {
  unsigned r = 0;
  while ((std::uint64_t{1} << r) < x) ++r;
  return r;
}

constexpr std::uint64_t bit_reverse(std::uint64_t x, unsigned bits) {
  std::uint64_t r = 0;
  for (unsigned i = 0; i < bits; ++i) {
    r = (r << 1) | ((x >> i) & 1);
  }
  return r;
}

}  // namespace fhesw
