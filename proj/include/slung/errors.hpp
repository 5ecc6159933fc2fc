#pragma once

#include <stdexcept>
#include <string>

namespace slung {

// Base class for all library failures. Subclasses map one-to-one onto the
// failure modes of the public operations.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidRotation : Error {
  using Error::Error;
};
struct SymmetricInput : Error {
  using Error::Error;
};
struct Degenerate : Error {
  using Error::Error;
};
struct DegenerateBearing : Error {
  using Error::Error;
};
struct CapTooLarge : Error {
  using Error::Error;
};
struct SingularMass : Error {
  using Error::Error;
};
struct NonFinite : Error {
  using Error::Error;
};
struct Diverged : Error {
  using Error::Error;
};
struct DegenerateThrust : Error {
  using Error::Error;
};
struct ParallelHeading : Error {
  using Error::Error;
};
struct NotHurwitz : Error {
  using Error::Error;
};
struct NotStabilizable : Error {
  using Error::Error;
};
struct GimbalNear : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace slung
