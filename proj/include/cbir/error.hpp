#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbir {

enum class ErrorCode {
  kInvalidArgument,
  kUnsupportedFormat,
  kCorruptData,
  kIndexOutOfRange,
  kEmptyImage,
  kGridTooFine,
  kLengthMismatch,
  kInvalidOrder,
  kSchemeMismatch,
  kDimensionMismatch,
  kZeroDenominator,
  kMissingFeature,
  kEmptyCorpus,
  kIoError,
  kVersionMismatch,
  kMalformedRecord,
  kEmptyStore,
  kEmptyRetrieved,
  kEmptyRelevant,
  kUnlabeledQuery,
  kUnlabeledCorpus,
  kSingleClass,
  kNotFound,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (CLI, HTTP service, bindings) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cbir
