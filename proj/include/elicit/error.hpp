#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace elicit {

enum class ErrorCode {
  // core-model
  SessionClosed,
  EmptyText,
  IndexOutOfRange,
  EmptyInput,
  InvalidAnnotation,
  UnknownDomain,
  ParseError,
  // mistake-catalog
  DuplicateId,
  MissingField,
  UnknownCategory,
  UnknownCriterion,
  EmptyContext,
  EmptyField,
  EmptyCatalog,
  UnfilledPlaceholder,
  // llm-gateway
  TransportError,
  AuthError,
  ReplayMiss,
  RateLimited,
  AmbiguousVerdict,
  NotAQuestion,
  Timeout,
  // pipelines
  KeyMismatch,
  DuplicateFlag,
  IncompleteMatrix,
  // stats
  SampleTooSmall,
  ZeroVariance,
  InvalidParameter,
  CompleteSeparation,
  NonConvergence,
  DegenerateScale,
  ScaleMismatch,
  // survey-kit
  CountMismatch,
  MissingCounterpart,
  UnknownBlock,
  OutOfScaleScore,
  DuplicateResponse,
  // service
  UnknownSession,
  InvalidRequest,
  UnknownSuggestion,
  AlreadyAccepted,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library carries one of the codes above so
/// callers (CLI exit status, HTTP status mapping, pipeline residue) can branch
/// on the class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace elicit
