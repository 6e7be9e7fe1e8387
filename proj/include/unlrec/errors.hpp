#pragma once

#include <stdexcept>
#include <string>

namespace unlrec {

// Shape or dimension mismatch between operands.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An API precondition was violated (e.g. backward on a non-scalar node).
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf encountered where finite values are required. Training aborts on this.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A pipeline stage was invoked before its inputs exist.
struct MissingArtifact : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace unlrec
