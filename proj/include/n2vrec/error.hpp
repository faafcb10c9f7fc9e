#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace n2vrec {

enum class ErrorKind {
  DatasetEmpty,
  ParseError,
  DegenerateDataset,
  InvalidK,
  EmptyCorpus,
  EmptyTestSet,
  IngestMismatch,
  InvalidArgument,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DatasetEmpty: return "DatasetEmpty";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DegenerateDataset: return "DegenerateDataset";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::IngestMismatch: return "IngestMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed input record; `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(ErrorKind::ParseError, source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace n2vrec
