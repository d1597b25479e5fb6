#include "cbir/error.hpp"

namespace cbir {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptData: return "CorruptData";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kEmptyImage: return "EmptyImage";
    case ErrorCode::kGridTooFine: return "GridTooFine";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidOrder: return "InvalidOrder";
    case ErrorCode::kSchemeMismatch: return "SchemeMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroDenominator: return "ZeroDenominator";
    case ErrorCode::kMissingFeature: return "MissingFeature";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kEmptyRetrieved: return "EmptyRetrieved";
    case ErrorCode::kEmptyRelevant: return "EmptyRelevant";
    case ErrorCode::kUnlabeledQuery: return "UnlabeledQuery";
    case ErrorCode::kUnlabeledCorpus: return "UnlabeledCorpus";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace cbir
