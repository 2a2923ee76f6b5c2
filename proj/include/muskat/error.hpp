#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace muskat {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value (maps to CLI exit status 2).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed, e.g. non-finite heights.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Configuration file failed validation; `path()` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// The upper and lower interfaces touched (gap <= floor). The run must halt.
class CollisionError : public Error {
 public:
  CollisionError(const std::string& what, double gap, std::size_t node)
      : Error(what), gap_(gap), node_(node) {}
  double gap() const noexcept { return gap_; }
  std::size_t node() const noexcept { return node_; }

 private:
  double gap_;
  std::size_t node_;
};

/// NaN/inf produced during evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The grid spacing is too coarse for the requested evaluation.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace muskat
