#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ebp {

enum class ErrorCode {
  InvalidModel,
  DegenerateFirstCrossing,
  InfiniteMoment,
  UnknownModel,
  ParseError,
  RejectionCapExceeded,
  NumericUnderflow,
  NumericOverflow,
  CapExceeded,
  MalformedPath,
  InsufficientData,
  SnapshotError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` is stable,
// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::DegenerateFirstCrossing: return "DegenerateFirstCrossing";
    case ErrorCode::InfiniteMoment: return "InfiniteMoment";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RejectionCapExceeded: return "RejectionCapExceeded";
    case ErrorCode::NumericUnderflow: return "NumericUnderflow";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::MalformedPath: return "MalformedPath";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SnapshotError: return "SnapshotError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ebp
