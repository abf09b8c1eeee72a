#pragma once

#include <stdexcept>
#include <string>

namespace dlqg {

// Base class for everything this library throws on bad input.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NotPositiveDefinite : Error {
  using Error::Error;
};

struct NotPSD : Error {
  using Error::Error;
};

struct BadProbability : Error {
  using Error::Error;
};

// A block solve hit a non-PD pivot; only reachable when the PD precondition
// of a partitioned matrix was never checked.
struct SingularBlock : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct UnknownPolicy : Error {
  using Error::Error;
};

}  // namespace dlqg
