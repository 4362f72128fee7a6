#include "bicf/error.hpp"

namespace bicf {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kBio: return "BioError";
    case ErrorCode::kSpec: return "SpecError";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyParallelCorpus: return "EmptyParallelCorpus";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kPairCountMismatch: return "PairCountMismatch";
    case ErrorCode::kIndexOutOfVocab: return "IndexOutOfVocab";
    case ErrorCode::kLabelOutOfInventory: return "LabelOutOfInventory";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDivergence: return "DivergenceError";
    case ErrorCode::kMissingImport: return "MissingImport";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace bicf
