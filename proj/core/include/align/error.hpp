#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace align {

enum class ErrorKind {
  // ingestion
  MalformedRow,
  BoundsError,
  SchemaError,
  InvalidAnswer,
  DuplicateModality,
  IoError,
  // gateway
  UnboundPlaceholder,
  NonZeroTemperature,
  BackendUnavailable,
  ReplayMiss,
  ConflictError,
  // proficiency / diagnosis
  UnknownTopic,
  InvalidTau,
  InvalidBands,
  EmptyEvidence,
  UnparseableDiagnosis,
  CountMismatch,
  // labeling / recommendation / summary
  UnparseableLabel,
  FixtureMiss,
  BrokenLink,
  UnparseableVerdict,
  InvalidK,
  MissingSection,
  StudentMismatch,
  // evaluation / simulation
  NoExamData,
  EmptyIntersection,
  ConfigError,
  ValidationFailed,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// True for failures caused by an LLM, search or fetch backend rather than by the data.
bool is_backend_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace align
