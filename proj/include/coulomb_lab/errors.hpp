#pragma once

#include <stdexcept>
#include <string>

namespace clab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields live on different grids") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed snapshot header or wrong magic.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class LengthMismatch : public IoError {
 public:
  using IoError::IoError;
};

/// Iterative solver gave up; carries the last residual it saw.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A construction would be under-resolved on the grid.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Geometric precondition failed (empty mask, non-star-shaped set, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace clab
