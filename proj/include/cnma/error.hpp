#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cnma {

enum class ErrorCode {
  InvalidArgument,
  EmptyToken,
  DuplicateComponent,
  UnknownComponent,
  DuplicateTreatment,
  DuplicateStudy,
  TooFewArms,
  EmptyNetwork,
  Disconnected,
  ZeroCell,
  EventsExceedTotal,
  NotPositiveDefinite,
  DimensionMismatch,
  UnknownAnchor,
  MulticomponentAnchor,
  ZeroVariance,
  NonFiniteDensity,
  ScaleCollapse,
  MalformedInput,
  ZeroStandardError,
  MissingTruth,
  ConvergenceFailure,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cnma
