#include "elicit/error.hpp"

namespace elicit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidAnnotation: return "InvalidAnnotation";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::UnknownCriterion: return "UnknownCriterion";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::EmptyField: return "EmptyField";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::UnfilledPlaceholder: return "UnfilledPlaceholder";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::AmbiguousVerdict: return "AmbiguousVerdict";
    case ErrorCode::NotAQuestion: return "NotAQuestion";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::DuplicateFlag: return "DuplicateFlag";
    case ErrorCode::IncompleteMatrix: return "IncompleteMatrix";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::CompleteSeparation: return "CompleteSeparation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::ScaleMismatch: return "ScaleMismatch";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::MissingCounterpart: return "MissingCounterpart";
    case ErrorCode::UnknownBlock: return "UnknownBlock";
    case ErrorCode::OutOfScaleScore: return "OutOfScaleScore";
    case ErrorCode::DuplicateResponse: return "DuplicateResponse";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::UnknownSuggestion: return "UnknownSuggestion";
    case ErrorCode::AlreadyAccepted: return "AlreadyAccepted";
  }
  return "Unknown";
}

}  // namespace elicit
