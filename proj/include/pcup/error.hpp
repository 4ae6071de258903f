#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcup {

enum class ErrorCode {
  EmptyMesh,
  ZeroLengthEdge,
  MissingNormals,
  TooFewPoints,
  InvalidArgument,
  EmptySet,
  SizeMismatch,
  NonpositiveRadius,
  ShapeMismatch,
  StaleCache,
  TooFewModels,
  EmptyTestSet,
  BadMagic,
  VersionUnsupported,
  TruncatedFile,
  ChecksumMismatch,
  Io,
  Parse,
  Config,
  NumericFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` distinguishes failure kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pcup
