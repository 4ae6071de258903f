#include "pcup/error.hpp"

namespace pcup {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::ZeroLengthEdge: return "ZeroLengthEdge";
    case ErrorCode::MissingNormals: return "MissingNormals";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NonpositiveRadius: return "NonpositiveRadius";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::TooFewModels: return "TooFewModels";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Config: return "Config";
    case ErrorCode::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

}  // namespace pcup
