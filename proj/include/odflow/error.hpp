#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace odflow {

enum class ErrorCode {
  kParseError,
  kUnknownRegion,
  kDuplicateFlow,
  kNegativeMagnitude,
  kSelfFlow,
  kInvalidRange,
  kOverlappingGroups,
  kInvalidSpacing,
  kOutOfBounds,
  kInfeasibleGeometry,
  kBadGridAssignment,
  kUnknownSelection,
  kAntipodalAmbiguity,
  kCorrespondenceMismatch,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All validation failures raised by the engine. `detail` carries the offending
// item (region id, line number, ...) so front ends can build structured errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace odflow
