#pragma once

#include <stdexcept>
#include <string>

namespace tmlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad domain description, wrong field length, unknown vertex.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition is violated (e.g. alpha >= lambda1).
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to reach its tolerance.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Zero-area or inverted triangle met during assembly.
class DegenerateTriangle : public Error {
 public:
  explicit DegenerateTriangle(int triangle)
      : Error("degenerate triangle " + std::to_string(triangle) + " (non-positive area)"),
        triangle_(triangle) {}
  int triangle() const noexcept { return triangle_; }

 private:
  int triangle_;
};

}  // namespace tmlab
