#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace greenshield {

enum class ErrorCode {
  MissingColumn,
  UnparsableCell,
  UnknownClassLabel,
  OutOfRange,
  AllMissing,
  EmptyAfterFiltering,
  EmptyInput,
  TooFewSamples,
  DimensionMismatch,
  SingleClassInput,
  NonFiniteLoss,
  ZeroWeightVector,
  NotLinearKernel,
  NotImplemented,
  InvalidLabel,
  UnsupportedVersion,
  MalformedDocument,
  LengthMismatch,
  SingleClassTruth,
  EmptyTestSet,
  StaleTimestamp,
  UnknownNode,
  WrongKind,
  MalformedScript,
  InvalidN,
  InvalidArgument,
  Io,
};

/// Stable snake_case identifier used in CLI diagnostics and HTTP error bodies.
std::string_view error_code_name(ErrorCode code);

/// The single exception type thrown by the library. `detail()` carries the
/// offending column/field name where one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace greenshield
