#pragma once

#include <stdexcept>
#include <string>

namespace itnumm {

// Base for every failure raised by the library. The CLI maps ConfigError to
// exit code 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad config field, inconsistent parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A function was evaluated outside its domain (r <= 0, coincident particles,
// point outside the ordered subspace, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: non-convergence, non-positive eigenvalue, oracle mismatch.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The requested mesh cannot be produced (acceptance collapsed).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace itnumm
