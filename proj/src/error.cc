#include "ease/error.h"

namespace ease {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kEmptyMask: return "EmptyMask";
    case ErrorKind::kEmptySentence: return "EmptySentence";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kUnknownEntity: return "UnknownEntity";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kTooFewPoints: return "TooFewPoints";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kEmptyPairs: return "EmptyPairs";
    case ErrorKind::kEmptyRelevance: return "EmptyRelevanceAll";
    case ErrorKind::kAlignmentUndefined: return "AlignmentUndefined";
    case ErrorKind::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorKind::kVersionMismatch: return "VersionMismatch";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace ease
