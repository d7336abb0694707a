#pragma once

#include <stdexcept>
#include <string>

namespace carpenter {

/// Input rejected by a precondition check. The message names the violated
/// inequality or the offending value.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A lazily materialized sequence ran out of terms before the requested
/// quantity could be computed. Finite sources raise this; infinite tails never do.
class NeedsMoreTerms : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant failed. Reaching this means a bug, not bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace carpenter
