#pragma once

#include <stdexcept>
#include <string>

namespace fusekit {

// Base of every error the library reports. Callers that only care about
// "something went wrong" catch this; the CLI maps it to a nonzero exit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Unsupported or corrupt image file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Fusion weights do not sum to the required constant.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace fusekit
