#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bicf {

enum class ErrorCode {
  kIo = 1,
  kParse,
  kValidation,
  kBio,
  kSpec,
  kEmptyCorpus,
  kEmptyParallelCorpus,
  kIndexOutOfRange,
  kPairCountMismatch,
  kIndexOutOfVocab,
  kLabelOutOfInventory,
  kShapeMismatch,
  kDivergence,
  kMissingImport,
  kLengthMismatch,
  kEmptyInput,
  kConfig,
  kInvalidArgument,
};

const char* error_code_name(ErrorCode code);

// Base for every error raised by the library. The C API maps the code
// one-to-one onto its integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason,
             const std::string& source = "")
      : Error(ErrorCode::kParse,
              (source.empty() ? "line " : source + ":") +
                  std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m)
      : Error(ErrorCode::kValidation, m) {}
};

class BioError : public Error {
 public:
  explicit BioError(const std::string& m) : Error(ErrorCode::kBio, m) {}
};

class IndexOutOfRange : public Error {
 public:
  IndexOutOfRange(std::size_t line, const std::string& reason)
      : Error(ErrorCode::kIndexOutOfRange,
              "line " + std::to_string(line) + ": " + reason),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace bicf
