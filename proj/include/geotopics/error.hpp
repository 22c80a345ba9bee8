// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <stdexcept>
#include <string>

namespace geotopics {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad latitude/longitude input.
struct InvalidCoordinateError : Error {
  using Error::Error;
};

// A 3-vector that should be unit length is not.
struct InvalidVectorError : Error {
  using Error::Error;
};

// Argument outside a function's mathematical domain.
struct DomainError : Error {
  using Error::Error;
};

struct UnsupportedDimensionError : Error {
  using Error::Error;
};

// Item index outside the catalog.
struct InvalidItemError : Error {
  using Error::Error;
};

// Bookkeeping guard tripped: double-remove, add-while-assigned, table drift.
// Always a programming bug, never a data problem.
struct StateCorruptionError : Error {
  using Error::Error;
};

// Shards handed to merge() were snapshotted at different epochs.
struct MergeEpochError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

}  // namespace geotopics
