#pragma once

#include <stdexcept>
#include <string>

namespace gewi {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A qubit handle was used after it was measured, or never existed.
class InvalidQubit : public Error {
 public:
  using Error::Error;
};

/// Frame could not be encoded or the received qubit stream does not parse.
class FramingError : public Error {
 public:
  using Error::Error;
};

/// Entanglement buffer pushed while full or popped while empty.
class BufferError : public Error {
 public:
  using Error::Error;
};

/// Metric requested on counters that leave it undefined.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Experiment or sweep parameters violate their invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The link delivered something other than what was injected.
class DeliveryError : public Error {
 public:
  using Error::Error;
};

}  // namespace gewi
