#pragma once

#include <stdexcept>
#include <string>

namespace gistill {

// Every failure the library reports carries one of these kinds so callers
// (and the CLI exit-code mapping) can dispatch without string matching.
enum class ErrorKind {
  EmptyInput,
  EmptyTrace,
  BadMagic,
  MalformedHeader,
  TruncatedPayload,
  ShapeMismatch,
  RowNotStochastic,
  LengthMismatch,
  DimensionMismatch,
  OutOfRange,
  DuplicateKey,
  UnknownKey,
  MissingArtifact,
  MissingPath,
  NumericalFailure,
  IoError,
  InvalidArgument,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyTrace: return "EmptyTrace";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::RowNotStochastic: return "RowNotStochastic";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::MissingPath: return "MissingPath";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace gistill
