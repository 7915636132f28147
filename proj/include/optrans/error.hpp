#pragma once

#include <stdexcept>
#include <string>

namespace optrans {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter outside the documented domain (p <= 2, p < 1, a outside (0,1), ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Lattice points of different dimension were combined.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Checked 64-bit integer arithmetic overflowed.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// One-sided Jacobi hit its sweep cap before the off-diagonal test passed.
class SvdNotConverged : public Error {
 public:
  using Error::Error;
};

/// Two contributions landed on the same generator coefficient.
class CollisionError : public Error {
 public:
  using Error::Error;
};

/// The Neumann iteration measured an error ratio above one.
class NonContraction : public Error {
 public:
  using Error::Error;
};

/// Phase-space point not on the sampling lattice of the grid.
class MisalignedPoint : public Error {
 public:
  using Error::Error;
};

/// Sampled objects living on different grids were combined.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// The orthogonal-witness construction received a window vanishing on the chosen cells.
class DegenerateWitness : public Error {
 public:
  using Error::Error;
};

/// Gram system of translates is singular beyond the ridge regularisation.
class SingularGram : public Error {
 public:
  SingularGram(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Malformed serialized input (plan files, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace optrans
