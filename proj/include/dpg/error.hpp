// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dpg {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments or misuse of an API/CLI surface.
class UsageError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

// Input violates a declared file schema (column/landmark counts, headers).
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

// A cell/token could not be parsed as the expected type.
class ParseError : public DataError {
public:
    using DataError::DataError;
};

// A clip file does not hold exactly the required number of frames.
class ClipLengthError : public DataError {
public:
    using DataError::DataError;
};

// Tensor shape mismatch between operation inputs.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Filesystem failure (open/read/write).
class IoError : public Error {
public:
    using Error::Error;
};

// Checkpoint has a bad magic or an unsupported format version.
class FormatError : public Error {
public:
    using Error::Error;
};

// Checkpoint bytes are unreadable (truncated header, invalid JSON).
class CorruptionError : public Error {
public:
    using Error::Error;
};

// Checkpoint directory disagrees with its payload or config.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Training produced non-finite losses, gradients, or parameters.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace dpg
