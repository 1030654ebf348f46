#include "cnma/error.hpp"

namespace cnma {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyToken: return "EmptyToken";
    case ErrorCode::DuplicateComponent: return "DuplicateComponent";
    case ErrorCode::UnknownComponent: return "UnknownComponent";
    case ErrorCode::DuplicateTreatment: return "DuplicateTreatment";
    case ErrorCode::DuplicateStudy: return "DuplicateStudy";
    case ErrorCode::TooFewArms: return "TooFewArms";
    case ErrorCode::EmptyNetwork: return "EmptyNetwork";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::ZeroCell: return "ZeroCell";
    case ErrorCode::EventsExceedTotal: return "EventsExceedTotal";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownAnchor: return "UnknownAnchor";
    case ErrorCode::MulticomponentAnchor: return "MulticomponentAnchor";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::NonFiniteDensity: return "NonFiniteDensity";
    case ErrorCode::ScaleCollapse: return "ScaleCollapse";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::ZeroStandardError: return "ZeroStandardError";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace cnma
