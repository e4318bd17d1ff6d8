#pragma once

#include <stdexcept>
#include <string>

namespace fadec {

/// Process exit status associated with an error category.
enum class ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kInternal = 3,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::kValidation)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Tensor extents disagree with what an operation requires.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape error: " + what) {}
};

/// Exponent plan, dependency graph or other configuration cannot be honoured.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("configuration error: " + what) {}
};

/// Non-finite or out-of-range model or tensor data.
class InvalidData : public Error {
 public:
  explicit InvalidData(const std::string& what) : Error("invalid data: " + what) {}
};

class AnalysisError : public Error {
 public:
  explicit AnalysisError(const std::string& what) : Error("analysis error: " + what) {}
};

class QueryError : public Error {
 public:
  explicit QueryError(const std::string& what) : Error("query error: " + what) {}
};

/// Malformed input file; the message names the file and the offending field.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse error: " + what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("usage error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("I/O error: " + what, ExitCode::kIo) {}
};

/// An internal invariant was violated; always a bug.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error("internal error: " + what, ExitCode::kInternal) {}
};

}  // namespace fadec
