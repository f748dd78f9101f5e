#include "almn/error.hpp"

namespace almn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::EmptyNegativeSet: return "EmptyNegativeSet";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UninitializedCenter: return "UninitializedCenter";
    case ErrorCode::OddGroupSize: return "OddGroupSize";
    case ErrorCode::SingleClassBatch: return "SingleClassBatch";
    case ErrorCode::InvalidBatch: return "InvalidBatch";
    case ErrorCode::InsufficientClasses: return "InsufficientClasses";
    case ErrorCode::InsufficientSamplesInClass: return "InsufficientSamplesInClass";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::LabelFeatureCountMismatch: return "LabelFeatureCountMismatch";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::TooFewItems: return "TooFewItems";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace almn
