#include "align/error.hpp"

namespace align {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::BoundsError: return "BoundsError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::InvalidAnswer: return "InvalidAnswer";
    case ErrorKind::DuplicateModality: return "DuplicateModality";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::UnboundPlaceholder: return "UnboundPlaceholder";
    case ErrorKind::NonZeroTemperature: return "NonZeroTemperature";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::ReplayMiss: return "ReplayMiss";
    case ErrorKind::ConflictError: return "ConflictError";
    case ErrorKind::UnknownTopic: return "UnknownTopic";
    case ErrorKind::InvalidTau: return "InvalidTau";
    case ErrorKind::InvalidBands: return "InvalidBands";
    case ErrorKind::EmptyEvidence: return "EmptyEvidence";
    case ErrorKind::UnparseableDiagnosis: return "UnparseableDiagnosis";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::UnparseableLabel: return "UnparseableLabel";
    case ErrorKind::FixtureMiss: return "FixtureMiss";
    case ErrorKind::BrokenLink: return "BrokenLink";
    case ErrorKind::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::MissingSection: return "MissingSection";
    case ErrorKind::StudentMismatch: return "StudentMismatch";
    case ErrorKind::NoExamData: return "NoExamData";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::ValidationFailed: return "ValidationFailed";
  }
  return "Unknown";
}

bool is_backend_error(ErrorKind kind) noexcept {
  return kind == ErrorKind::BackendUnavailable || kind == ErrorKind::ReplayMiss ||
         kind == ErrorKind::FixtureMiss;
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

}  // namespace align
