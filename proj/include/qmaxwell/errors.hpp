#pragma once

#include <stdexcept>
#include <string>

namespace qmax {

/// Invalid user-facing configuration (grid sizes, entropy domains, option ranges).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical invariant was violated (non-symmetric kernel, negative spectrum, ...).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// A solver could not proceed (singular Jacobian, degenerate profile).
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qmax
