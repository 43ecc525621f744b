#pragma once

#include <stdexcept>
#include <string>

namespace pixie {

/// Base class of every error raised by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A document could not be read (malformed JSON, missing field, bad PGM header).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value violates a structural invariant or an operation's precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A task graph does not fit onto the requested grid.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class CodecError : public Error {
 public:
  using Error::Error;
};

/// Payload or header has the wrong length or layout.
class FramingError : public CodecError {
 public:
  using CodecError::CodecError;
};

/// The bitstream was produced for a different grid.
class WrongGridError : public CodecError {
 public:
  using CodecError::CodecError;
};

class InvalidOpcodeError : public CodecError {
 public:
  using CodecError::CodecError;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pixie
