#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace irk {

// Error codes shared by every module. The string form (to_string) is what the
// CLI prints on standard error, so keep names stable.
enum class ErrorCode {
  MalformedFile,
  DanglingRef,
  DuplicateId,
  IoFailure,
  ValidationError,
  UnknownScreen,
  UnknownComponent,
  NoLaunch,
  Unreachable,
  UnsupportedFormat,
  EmptyApp,
  DimensionMismatch,
  MissingKey,
  WeightMismatch,
  CommentNotInThread,
  SingleClassDataset,
  SameProject,
  EmptySplit,
  TooFewItems,
  InvalidConfig,
  UnknownIssue,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace irk
