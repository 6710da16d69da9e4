#pragma once

#include <stdexcept>
#include <string>

namespace cocyclab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not match (truncation size, vector length, frame width).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An orthonormal frame collapsed while being pushed along an orbit.
class UnderflowError : public Error {
 public:
  UnderflowError(const std::string& what, long long step) : Error(what), step_(step) {}
  long long step() const { return step_; }

 private:
  long long step_;
};

/// The image of a frame lost rank (Gram determinant vanished).
class RankLossError : public Error {
 public:
  using Error::Error;
};

/// Neighbouring singular exponents are closer than the gap tolerance.
class UnresolvedSplitting : public Error {
 public:
  using Error::Error;
};

/// Classification was requested without the certificates it depends on.
class IncompleteEvidence : public Error {
 public:
  using Error::Error;
};

/// Requested more exponents than the computed spectrum resolves.
class InsufficientHorizon : public Error {
 public:
  using Error::Error;
};

/// Perturbation parameters are inconsistent with the base dynamics.
class ParameterError : public Error {
 public:
  using Error::Error;
};

}  // namespace cocyclab
