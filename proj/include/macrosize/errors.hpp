#pragma once

#include <stdexcept>
#include <string>

namespace macrosize {

/// Raised when a computation cannot meet its numerical contract: truncation
/// tail above tolerance, a root search that fails to bracket or converge.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for malformed state-family specifications and CLI input.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace macrosize
