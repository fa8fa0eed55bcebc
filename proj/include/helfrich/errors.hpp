#pragma once

#include <stdexcept>
#include <string>

namespace helfrich {

/// Base class of every error raised by the library. The CLI maps
/// ValidationError subclasses to exit code 1 and NumericalError subclasses
/// to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Requested resource (subdivision level, grid size) exceeds a configured cap.
class ResourceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Infeasible area/volume targets (A0^3 < 36 pi V0^2).
class ConstraintViolationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateGeometryError : public NumericalError {
 public:
  DegenerateGeometryError(const std::string& what, long face = -1)
      : NumericalError(what), face_(face) {}
  /// Offending face index, or -1 when not attributable to a single face.
  long face() const { return face_; }

 private:
  long face_;
};

class ProjectionFailedError : public NumericalError {
 public:
  ProjectionFailedError(const std::string& what, double area_violation, double volume_violation)
      : NumericalError(what), area_violation_(area_violation), volume_violation_(volume_violation) {}
  double area_violation() const { return area_violation_; }
  double volume_violation() const { return volume_violation_; }

 private:
  double area_violation_;
  double volume_violation_;
};

class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, int iterations)
      : NumericalError(what + " (" + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

}  // namespace helfrich
