#pragma once

#include <stdexcept>
#include <string>

namespace fedvote {

// Error taxonomy shared by every module. All derive from std::runtime_error so
// callers that only care about "something failed" can catch one type.

/// Tensor or batch extents do not fit the operation.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error("shape error: " + what) {}
};

/// A scalar argument or count is outside its valid domain.
class ArgumentError : public std::runtime_error {
public:
    explicit ArgumentError(const std::string& what) : std::runtime_error("argument error: " + what) {}
};

/// On-disk dataset / checkpoint content is malformed.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error("format error: " + what) {}
};

/// Two models, parameter vectors or updates cannot be combined.
class CompatibilityError : public std::runtime_error {
public:
    explicit CompatibilityError(const std::string& what)
        : std::runtime_error("compatibility error: " + what) {}
};

} // namespace fedvote
