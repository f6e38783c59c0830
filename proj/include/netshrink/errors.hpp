// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace netshrink {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural problem with a graph (cycle, unknown id, invalid graph passed
/// to an operation that requires a valid one).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Malformed document. `location()` is a JSON path or byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& location, const std::string& message)
      : Error(location.empty() ? message : location + ": " + message),
        location_(location) {}

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

/// Tensor shapes that cannot be inferred or do not agree at a node.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Filter mask does not match the graph it is applied to.
class MaskError : public Error {
 public:
  using Error::Error;
};

}  // namespace netshrink
