#include "fhesw/common.hpp"

namespace fhesw {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::DegreeMismatch: return "DegreeMismatch";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::InvalidF: return "InvalidF";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
    case ErrorCode::ScaleMismatch: return "ScaleMismatch";
    case ErrorCode::InsufficientLevel: return "InsufficientLevel";
    case ErrorCode::MissingGaloisKey: return "MissingGaloisKey";
    case ErrorCode::SlotCountMismatch: return "SlotCountMismatch";
    case ErrorCode::ParamMismatch: return "ParamMismatch";
    case ErrorCode::KeyLengthMismatch: return "KeyLengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::NonUniformBatch: return "NonUniformBatch";
    case ErrorCode::NonPowerOfTwoDims: return "NonPowerOfTwoDims";
    case ErrorCode::MissingKeyCiphertext: return "MissingKeyCiphertext";
    case ErrorCode::StrategyPlanMismatch: return "StrategyPlanMismatch";
    case ErrorCode::AlphabetOverflow: return "AlphabetOverflow";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

}  // namespace fhesw
