#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace selmer_lab {

enum class ErrorCode {
  InvalidArgument,
  LengthMismatch,
  AmbientMismatch,
  DualityViolation,
  ProfileIncomplete,
  PrimeInProduct,
  UnknownPrime,
  PrimesExhausted,
  ParityMismatch,
  BoundExceeded,
  MalformedSystem,
  CeilingExceeded,
  Format,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AmbientMismatch: return "AmbientMismatch";
    case ErrorCode::DualityViolation: return "DualityViolation";
    case ErrorCode::ProfileIncomplete: return "ProfileIncomplete";
    case ErrorCode::PrimeInProduct: return "PrimeInProduct";
    case ErrorCode::UnknownPrime: return "UnknownPrime";
    case ErrorCode::PrimesExhausted: return "PrimesExhausted";
    case ErrorCode::ParityMismatch: return "ParityMismatch";
    case ErrorCode::BoundExceeded: return "BoundExceeded";
    case ErrorCode::MalformedSystem: return "MalformedSystem";
    case ErrorCode::CeilingExceeded: return "CeilingExceeded";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

// Every library failure is an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace selmer_lab
