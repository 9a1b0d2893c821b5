#pragma once

#include <stdexcept>
#include <string>

namespace pastis {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input (FASTA, edge files, configs).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters detected before any compute starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A collective or point-to-point receive never completed.
class CollectiveTimeout : public Error {
 public:
  using Error::Error;
};

/// Raised in a worker when a peer failed and the grid run is being torn down.
class GridAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace pastis
