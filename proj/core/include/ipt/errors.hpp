#pragma once

#include <stdexcept>
#include <string>

namespace ipt {

// Bad configuration or argument: wrong alphabet, infeasible threshold, etc.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A constraint set that cannot be reached (c above sup q, target outside the
// letter range, ...).
class Infeasible : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A bound was requested outside the parameter range where it holds.
class PreconditionViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Input data problems: out-of-alphabet samples, unparseable CSV cells.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bisection that did not meet its residual tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation not defined for the requested q-function kind.
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ipt
