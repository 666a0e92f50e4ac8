#pragma once

#include <stdexcept>
#include <string>

namespace grw {

// Base for every error raised by the library. Callers that only care about
// "something went wrong in grw" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point that does not lie on the manifold (off the sphere, nonpositive
// half-plane height, wrong coordinate count).
class InvalidPoint : public Error {
 public:
  using Error::Error;
};

// The two points are (numerically) conjugate: more than one minimal geodesic.
class CutLocusError : public Error {
 public:
  using Error::Error;
};

// A precondition on a scalar argument is violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class StepSizeFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateCurve : public Error {
 public:
  using Error::Error;
};

class AllZeroCounts : public Error {
 public:
  using Error::Error;
};

class SchemaVersionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace grw
