#include "layoutcot/error.hpp"

namespace layoutcot {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroCanvas: return "ZeroCanvas";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::NegativeDimension: return "NegativeDimension";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::VocabularyError: return "VocabularyError";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyLayout: return "EmptyLayout";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::MissingLabelStats: return "MissingLabelStats";
    case ErrorCode::ZeroTrainingArea: return "ZeroTrainingArea";
    case ErrorCode::EmptyExemplars: return "EmptyExemplars";
    case ErrorCode::UnboundPlaceholder: return "UnboundPlaceholder";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::InvalidPayload: return "InvalidPayload";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::CredentialMissing: return "CredentialMissing";
    case ErrorCode::NoViableCandidate: return "NoViableCandidate";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace layoutcot
