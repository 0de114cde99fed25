// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vtprune {

enum class ErrorKind {
    Format,      // malformed tensor file header
    Shape,       // wrong rank or mismatched dims
    Value,       // non-finite or negative element
    Grid,        // token count does not form the required grid
    Validation,  // bad argument or inconsistent input
    Degenerate,  // input carries no usable mass
    Io,          // filesystem failure
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the toolkit is reported through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + message),
          m_kind(kind),
          m_detail(message) {}

    ErrorKind kind() const noexcept {
        return m_kind;
    }

    /// Message without the "<kind> error: " prefix.
    const std::string& detail() const noexcept {
        return m_detail;
    }

private:
    ErrorKind m_kind;
    std::string m_detail;
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Format:
        return "format";
    case ErrorKind::Shape:
        return "shape";
    case ErrorKind::Value:
        return "value";
    case ErrorKind::Grid:
        return "grid";
    case ErrorKind::Validation:
        return "validation";
    case ErrorKind::Degenerate:
        return "degenerate-input";
    case ErrorKind::Io:
        return "I/O";
    }
    return "unknown";
}

}  // namespace vtprune
