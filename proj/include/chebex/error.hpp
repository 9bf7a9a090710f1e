#pragma once

#include <stdexcept>
#include <string>

namespace chebex {

/// Invalid input, parameters or configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation point outside the region where an approximation is defined.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A numerical routine could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace chebex
