#pragma once

#include <stdexcept>
#include <string>

namespace ordpat {

// Input errors map to CLI exit code 2, numerical failures to exit code 3.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadLength : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class UnsupportedOrder : public InputError {
 public:
  using InputError::InputError;
};

class EmbeddingNotPSD : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QuadratureNotConverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CapReached : public NumericalError {
 public:
  CapReached(const std::string& what, long long cap)
      : NumericalError(what), cap_(cap) {}
  long long cap() const noexcept { return cap_; }

 private:
  long long cap_;
};

}  // namespace ordpat
