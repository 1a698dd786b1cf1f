#pragma once

#include <stdexcept>
#include <string>

namespace cgqed {

// Invalid argument values (out-of-range coordinate, zero momentum mode, ...).
class domain_error : public std::invalid_argument {
public:
    explicit domain_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Inconsistent or unusable run configuration. CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Request exceeds what this desk-scale tool can compute. CLI exit code 3.
class capability_error : public std::runtime_error {
public:
    explicit capability_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated internal invariant (e.g. a Hamiltonian term matching no Trotter class).
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace cgqed
