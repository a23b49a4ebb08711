// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace gsck {

/// Root of every error raised by the library. The CLI maps `NumericError` to exit
/// code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text or header (PLY header, PGM/PNG, JSON).
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Input is well-formed but does not carry the required fields or types.
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// Binary payload shorter than its header announced.
class TruncationError : public Error {
  public:
    using Error::Error;
};

class WriteError : public Error {
  public:
    using Error::Error;
};

/// Non-finite or otherwise numerically invalid values.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Image or array dimensions that do not agree.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Invalid configuration, mismatched pairing of inputs, unknown option values.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// The contrastive anchors cannot be formed because G_h or G_l is empty.
class AnchorError : public Error {
  public:
    using Error::Error;
};

} // namespace gsck
