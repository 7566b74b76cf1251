#pragma once

#include <stdexcept>
#include <string>

namespace vinet {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor / layer dimension mismatches.
struct ShapeError : Error {
  using Error::Error;
};

// Rotation angle too close to pi for a principal-branch logarithm.
struct AngleNearPiError : Error {
  using Error::Error;
};

// NaN/Inf detected, or an optimizer fed a non-finite gradient.
struct NumericError : Error {
  using Error::Error;
};

// Bad or malformed persisted data.
struct IoError : Error {
  using Error::Error;
};

// Bad run configuration (unknown keys, invalid values).
struct ConfigError : Error {
  using Error::Error;
};

// Training loss became non-finite or blew past the divergence guard.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace vinet
