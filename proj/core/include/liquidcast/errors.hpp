#pragma once

#include <stdexcept>
#include <string>

namespace liquidcast {

/// Failure categories used across the toolkit. Each maps to either a data
/// problem (bad or insufficient input) or a numerical problem (computation
/// cannot proceed); the CLI translates the category into its exit code.
enum class ErrorCode {
  // numerical
  SingularSystem,
  DegenerateSeries,
  ShapeMismatch,
  NonPositiveGap,
  WindowLengthMismatch,
  EmptyBatch,
  NonFiniteForward,
  AllBatchesSkipped,
  NoValidConfig,
  AllIndicesFailed,
  ZeroVarianceErrors,
  // data
  InsufficientHistory,
  UnparseableDate,
  DuplicateDateWithinSource,
  EmptyJoin,
  NonPositivePrice,
  MissingExpectedColumn,
  DegenerateSplit,
  RangeTooShort,
  SpanTooShort,
  TooFewResiduals,
  EmptyPairs,
  BadConfig,
};

[[nodiscard]] constexpr const char* error_code_name(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonPositiveGap: return "NonPositiveGap";
    case ErrorCode::WindowLengthMismatch: return "WindowLengthMismatch";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NonFiniteForward: return "NonFiniteForward";
    case ErrorCode::AllBatchesSkipped: return "AllBatchesSkipped";
    case ErrorCode::NoValidConfig: return "NoValidConfig";
    case ErrorCode::AllIndicesFailed: return "AllIndicesFailed";
    case ErrorCode::ZeroVarianceErrors: return "ZeroVarianceErrors";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::UnparseableDate: return "UnparseableDate";
    case ErrorCode::DuplicateDateWithinSource: return "DuplicateDateWithinSource";
    case ErrorCode::EmptyJoin: return "EmptyJoin";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::MissingExpectedColumn: return "MissingExpectedColumn";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::RangeTooShort: return "RangeTooShort";
    case ErrorCode::SpanTooShort: return "SpanTooShort";
    case ErrorCode::TooFewResiduals: return "TooFewResiduals";
    case ErrorCode::EmptyPairs: return "EmptyPairs";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// True for categories caused by malformed or insufficient input data, as
/// opposed to a numerical computation that failed on valid data.
[[nodiscard]] constexpr bool is_data_error(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::InsufficientHistory:
    case ErrorCode::UnparseableDate:
    case ErrorCode::DuplicateDateWithinSource:
    case ErrorCode::EmptyJoin:
    case ErrorCode::NonPositivePrice:
    case ErrorCode::MissingExpectedColumn:
    case ErrorCode::DegenerateSplit:
    case ErrorCode::RangeTooShort:
    case ErrorCode::SpanTooShort:
    case ErrorCode::TooFewResiduals:
    case ErrorCode::EmptyPairs:
    case ErrorCode::BadConfig:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace liquidcast
