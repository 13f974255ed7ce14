#pragma once

#include <stdexcept>
#include <string>

namespace pricce {

// Base for every failure caused by inputs (bad files, bad parameters,
// degenerate data). Anything else escaping the library is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Failure to load or run a classifier model. `kind` separates the load
/// failures callers may want to tell apart.
class ModelError : public Error {
 public:
  enum class Kind { MissingFile, Parse, ClassCount, Metadata, Unsupported, Runtime };

  ModelError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace pricce
