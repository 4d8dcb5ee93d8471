#pragma once

#include <stdexcept>
#include <string>

namespace cablesoup {

// All recoverable failures are reported through subclasses of Error so a
// caller (the CLI in particular) can distinguish "bad input" from "bug".
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Graph construction and validation.
class ZeroLengthError : public Error {
 public:
  explicit ZeroLengthError(const std::string& what) : Error(what) {}
};

class SelfLoopError : public Error {
 public:
  explicit SelfLoopError(const std::string& what) : Error(what) {}
};

class NotTransientError : public Error {
 public:
  explicit NotTransientError(const std::string& what) : Error(what) {}
};

class SingularSystemError : public Error {
 public:
  explicit SingularSystemError(const std::string& what) : Error(what) {}
};

// Samplers and numerics.
class StepTooCoarseError : public Error {
 public:
  explicit StepTooCoarseError(const std::string& what) : Error(what) {}
};

class TruncationTooTightError : public Error {
 public:
  explicit TruncationTooTightError(const std::string& what) : Error(what) {}
};

class InvalidParamsError : public Error {
 public:
  explicit InvalidParamsError(const std::string& what) : Error(what) {}
};

class InversionFailureError : public Error {
 public:
  explicit InversionFailureError(const std::string& what) : Error(what) {}
};

class OutOfDomainError : public Error {
 public:
  explicit OutOfDomainError(const std::string& what) : Error(what) {}
};

class InvalidIntensityError : public Error {
 public:
  explicit InvalidIntensityError(const std::string& what) : Error(what) {}
};

// Analysis-stage failures.
class InsufficientScalesError : public Error {
 public:
  explicit InsufficientScalesError(const std::string& what) : Error(what) {}
};

class EmptyOverlapError : public Error {
 public:
  explicit EmptyOverlapError(const std::string& what) : Error(what) {}
};

class EmptySoupError : public Error {
 public:
  explicit EmptySoupError(const std::string& what) : Error(what) {}
};

// Malformed files, unknown keys, bad CLI values.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

}  // namespace cablesoup
