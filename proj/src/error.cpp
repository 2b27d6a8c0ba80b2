#include "odflow/error.hpp"

namespace odflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownRegion: return "UnknownRegion";
    case ErrorCode::kDuplicateFlow: return "DuplicateFlow";
    case ErrorCode::kNegativeMagnitude: return "NegativeMagnitude";
    case ErrorCode::kSelfFlow: return "SelfFlow";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kOverlappingGroups: return "OverlappingGroups";
    case ErrorCode::kInvalidSpacing: return "InvalidSpacing";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kInfeasibleGeometry: return "InfeasibleGeometry";
    case ErrorCode::kBadGridAssignment: return "BadGridAssignment";
    case ErrorCode::kUnknownSelection: return "UnknownSelection";
    case ErrorCode::kAntipodalAmbiguity: return "AntipodalAmbiguity";
    case ErrorCode::kCorrespondenceMismatch: return "CorrespondenceMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace odflow
