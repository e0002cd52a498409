#include "greenshield/error.hpp"

namespace greenshield {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "missing_column";
    case ErrorCode::UnparsableCell: return "unparsable_cell";
    case ErrorCode::UnknownClassLabel: return "unknown_class_label";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::AllMissing: return "all_missing";
    case ErrorCode::EmptyAfterFiltering: return "empty_after_filtering";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::TooFewSamples: return "too_few_samples";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::SingleClassInput: return "single_class_input";
    case ErrorCode::NonFiniteLoss: return "non_finite_loss";
    case ErrorCode::ZeroWeightVector: return "zero_weight_vector";
    case ErrorCode::NotLinearKernel: return "not_linear_kernel";
    case ErrorCode::NotImplemented: return "not_implemented";
    case ErrorCode::InvalidLabel: return "invalid_label";
    case ErrorCode::UnsupportedVersion: return "unsupported_version";
    case ErrorCode::MalformedDocument: return "malformed_document";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::SingleClassTruth: return "single_class_truth";
    case ErrorCode::EmptyTestSet: return "empty_test_set";
    case ErrorCode::StaleTimestamp: return "stale_timestamp";
    case ErrorCode::UnknownNode: return "unknown_node";
    case ErrorCode::WrongKind: return "wrong_kind";
    case ErrorCode::MalformedScript: return "malformed_script";
    case ErrorCode::InvalidN: return "invalid_n";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace greenshield
