#include "irk/error.hpp"

namespace irk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile: return "MALFORMED_FILE";
    case ErrorCode::DanglingRef: return "DANGLING_REF";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::IoFailure: return "IO_FAILURE";
    case ErrorCode::ValidationError: return "VALIDATION_ERROR";
    case ErrorCode::UnknownScreen: return "UNKNOWN_SCREEN";
    case ErrorCode::UnknownComponent: return "UNKNOWN_COMPONENT";
    case ErrorCode::NoLaunch: return "NO_LAUNCH";
    case ErrorCode::Unreachable: return "UNREACHABLE";
    case ErrorCode::UnsupportedFormat: return "UNSUPPORTED_FORMAT";
    case ErrorCode::EmptyApp: return "EMPTY_APP";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::MissingKey: return "MISSING_KEY";
    case ErrorCode::WeightMismatch: return "WEIGHT_MISMATCH";
    case ErrorCode::CommentNotInThread: return "COMMENT_NOT_IN_THREAD";
    case ErrorCode::SingleClassDataset: return "SINGLE_CLASS_DATASET";
    case ErrorCode::SameProject: return "SAME_PROJECT";
    case ErrorCode::EmptySplit: return "EMPTY_SPLIT";
    case ErrorCode::TooFewItems: return "TOO_FEW_ITEMS";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::UnknownIssue: return "UNKNOWN_ISSUE";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace irk
