#pragma once

#include <stdexcept>
#include <string>

namespace bispectra {

/// Violated precondition on an argument (negative radius, zero a-tilde, kappa > n, ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical routine failed to deliver a result within its limits.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bispectra
