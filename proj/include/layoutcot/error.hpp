#pragma once

#include <stdexcept>
#include <string>

namespace layoutcot {

enum class ErrorCode {
  ZeroCanvas,
  ParseFailure,
  NegativeDimension,
  SchemaError,
  VocabularyError,
  EmptySplit,
  FormatError,
  DimensionMismatch,
  EmptyLayout,
  EmptyIndex,
  VersionMismatch,
  MissingLabelStats,
  ZeroTrainingArea,
  EmptyExemplars,
  UnboundPlaceholder,
  UnknownTemplate,
  InvalidPayload,
  TransportError,
  ReplayMiss,
  CredentialMissing,
  NoViableCandidate,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// Every domain failure in the library is reported through this type; the CLI
// maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace layoutcot
