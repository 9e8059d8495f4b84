#pragma once

#include <stdexcept>
#include <string>

namespace cmmn {

enum class ErrorCode {
  EmptyInput,
  FilterTooLarge,
  NonFinite,
  DimMismatch,
  NotSymmetric,
  NotPsd,
  SingularSource,
  LengthMismatch,
  NegativeBin,
  InconsistentChannels,
  ChannelMismatch,
  UnknownDomain,
  TooFewDomains,
  EmptyBand,
  InvalidSpec,
  BadMagicOrVersion,
  SizeMismatch,
  MissingFile,
};

constexpr const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::FilterTooLarge: return "FilterTooLarge";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::SingularSource: return "SingularSource";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NegativeBin: return "NegativeBin";
    case ErrorCode::InconsistentChannels: return "InconsistentChannels";
    case ErrorCode::ChannelMismatch: return "ChannelMismatch";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::TooFewDomains: return "TooFewDomains";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::BadMagicOrVersion: return "BadMagicOrVersion";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::MissingFile: return "MissingFile";
  }
  return "Unknown";
}

/// Library error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for errors caused by files on disk rather than by argument values.
  bool is_io() const noexcept {
    return code_ == ErrorCode::BadMagicOrVersion || code_ == ErrorCode::SizeMismatch ||
           code_ == ErrorCode::MissingFile;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cmmn
