#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace digit_forensics {

enum class ErrorCode {
  ZeroOrNonFinite,
  EmptyHistogram,
  InvalidDistribution,
  DegenerateInput,
  InvalidConfig,
  TooManySkips,
  UncalibratedReference,
  NoUsableOutcomes,
  CacheMiss,
  CorruptCache,
  NoNumericColumns,
  MalformedCsv,
  SchemaViolation,
  UnknownOperator,
  InvalidArgument,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroOrNonFinite: return "ZeroOrNonFinite";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TooManySkips: return "TooManySkips";
    case ErrorCode::UncalibratedReference: return "UncalibratedReference";
    case ErrorCode::NoUsableOutcomes: return "NoUsableOutcomes";
    case ErrorCode::CacheMiss: return "CacheMiss";
    case ErrorCode::CorruptCache: return "CorruptCache";
    case ErrorCode::NoNumericColumns: return "NoNumericColumns";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace digit_forensics
