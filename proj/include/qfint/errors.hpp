#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qfint {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector dimensions disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Enumeration exceeded its configured collection cap while building level `level`.
class BudgetError : public Error {
public:
    BudgetError(std::size_t level, std::size_t cap)
        : Error("collection budget of " + std::to_string(cap) + " exceeded while enumerating level s=" +
                std::to_string(level)),
          level_(level), cap_(cap) {}

    std::size_t level() const noexcept { return level_; }
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t level_;
    std::size_t cap_;
};

/// An exact oracle was asked for an instance larger than its hard size limit.
class GuardError : public Error {
public:
    using Error::Error;
};

/// Forms do not sum to the identity (or are not positive semidefinite).
class NormalizationError : public Error {
public:
    using Error::Error;
};

/// A computed quantity overflowed or became NaN.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Malformed instance file, edge list or report.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace qfint
