#pragma once

#include <stdexcept>

namespace mgsp {

/// Operand dimensions do not conform; the message names the offending mode
/// or count where applicable.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A tensor violates the multilayer-graph contract (asymmetry, negative
/// adjacency weights, nonzero self-loops, wrong representation).
class InvalidGraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File or stream could not be read/written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mgsp
