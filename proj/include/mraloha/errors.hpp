#pragma once

#include <stdexcept>
#include <string>

namespace mraloha {

/// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A truncated series hit its hard term cap before meeting its tolerance.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// HCache lookup for an order above the cache's max_order.
class OrderExceedsCacheError : public Error {
public:
    using Error::Error;
};

/// Closed form requested where its eps_u^-l factors degenerate.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Closed form requested beyond the relay count where double precision is certified.
class StabilityError : public Error {
public:
    using Error::Error;
};

/// Malformed simulator or sweep configuration.
class InvalidConfigError : public Error {
public:
    using Error::Error;
};

} // namespace mraloha
