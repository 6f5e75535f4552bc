#pragma once

#include <stdexcept>
#include <string>

namespace bilatrr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter point lies outside the admissible region of the R model.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated where it is undefined (zero-probability cell with
/// a positive count, vanishing denominator, log of zero).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An information matrix (or its Schur complement) is numerically singular.
class SingularInfoError : public Error {
 public:
  using Error::Error;
};

/// The per-group likelihood equation has no admissible solution.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// An iterative fit exhausted its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The data cannot identify the requested quantities (e.g. a group with no
/// responses or no non-responses).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// A confidence-bound search never crossed the critical value.
class SearchError : public Error {
 public:
  using Error::Error;
};

}  // namespace bilatrr
