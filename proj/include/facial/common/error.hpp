#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facial {

enum class ErrorKind {
    io,
    bad_magic,
    bad_header,
    truncated,
    dim_mismatch,
    shape_mismatch,
    invalid_argument,
    empty_selection,
    divergence,
    config,
    stage_order,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind alongside the message. The CLI
/// prints the kind so scripts can branch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace facial
