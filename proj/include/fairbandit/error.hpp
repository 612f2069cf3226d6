#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairbandit {

enum class ErrorCode {
  ZeroArms,
  RateTooHigh,
  NonIntegralBlock,
  InvalidRate,
  ZeroHorizon,
  InvalidSlots,
  NotBijective,
  Overflow,
  ArmNeverPulled,
  HorizonExceeded,
  RewardOutOfRange,
  ArmOutOfRange,
  InvalidDistribution,
  ZeroTurns,
  WrongPolicy,
  EmptyInput,
  HorizonTooLarge,
  ArmCountMismatch,
  IoFailure,
  ParseError,
  UnknownSession,
  SessionFinished,
  WrongPlayer,
  NegativePoints,
  CorruptSnapshot,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroArms: return "ZeroArms";
    case ErrorCode::RateTooHigh: return "RateTooHigh";
    case ErrorCode::NonIntegralBlock: return "NonIntegralBlock";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::ZeroHorizon: return "ZeroHorizon";
    case ErrorCode::InvalidSlots: return "InvalidSlots";
    case ErrorCode::NotBijective: return "NotBijective";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::ArmNeverPulled: return "ArmNeverPulled";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::RewardOutOfRange: return "RewardOutOfRange";
    case ErrorCode::ArmOutOfRange: return "ArmOutOfRange";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::ZeroTurns: return "ZeroTurns";
    case ErrorCode::WrongPolicy: return "WrongPolicy";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::ArmCountMismatch: return "ArmCountMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::SessionFinished: return "SessionFinished";
    case ErrorCode::WrongPlayer: return "WrongPlayer";
    case ErrorCode::NegativePoints: return "NegativePoints";
    case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace fairbandit
