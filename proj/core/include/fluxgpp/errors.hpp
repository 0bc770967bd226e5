#pragma once

#include <stdexcept>
#include <string>

namespace fluxgpp {

/// Raised for anything the caller fed us: bad values, schema violations,
/// unreadable or malformed files, inconsistent configuration. Maps to
/// exit code 2 in the CLI.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when an internal invariant is violated; indicates a bug, not
/// bad input. Maps to exit code 3 in the CLI.
class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fluxgpp
