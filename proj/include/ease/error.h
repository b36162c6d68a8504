#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ease {

enum class ErrorKind {
  kZeroVector,
  kDimMismatch,
  kEmptyMask,
  kEmptySentence,
  kParse,
  kDuplicateId,
  kUnknownEntity,
  kNonFinite,
  kConfig,
  kLengthMismatch,
  kDegenerateInput,
  kTooFewPoints,
  kShapeMismatch,
  kEmptyPairs,
  kEmptyRelevance,
  kAlignmentUndefined,
  kCorruptCheckpoint,
  kVersionMismatch,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library is reported through this type; callers that
// need to branch on the failure inspect kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse failures carry the 1-based line they occurred on (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ease
