// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ditmo {

/// Base of every error raised by the library. `stage()` is filled in by the
/// pipeline so a failure can be attributed to the step that produced it.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}

    const std::string& stage() const noexcept { return m_stage; }
    void set_stage(std::string stage) { m_stage = std::move(stage); }

private:
    std::string m_stage;
};

/// Invalid argument or configuration value (out-of-range parameter, mismatched dimensions, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A data structure failed validation (graph schema, cycle, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

enum class IoErrorKind {
    Unreadable,         // missing file, permission denied
    UnsupportedFormat,  // not PNG/JPEG/RGBE, or unsupported bit depth
    Corrupt,            // decoder rejected the payload
    WriteFailed,
};

class IoError : public Error {
public:
    IoError(IoErrorKind kind, const std::string& what) : Error(what), m_kind(kind) {}
    IoErrorKind kind() const noexcept { return m_kind; }

private:
    IoErrorKind m_kind;
};

enum class BackendErrorKind {
    Timeout,
    Transport,
    DimensionMismatch,
    MalformedResponse,
    Server,  // non-200 status with an error body
};

const char* to_string(BackendErrorKind kind);

class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& what, int status = 0)
        : Error(what), m_kind(kind), m_status(status) {}

    BackendErrorKind kind() const noexcept { return m_kind; }
    /// HTTP status for Server errors, 0 otherwise.
    int status() const noexcept { return m_status; }

private:
    BackendErrorKind m_kind;
    int m_status;
};

}  // namespace ditmo
