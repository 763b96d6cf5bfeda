// SPDX-License-Identifier: MIT
/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by every solver in the library.
 *
 * All operations are pure functions and report failures by throwing.  The
 * hierarchy lets callers (notably the CLI) map failures onto exit codes:
 * input problems derive from ValidationError, numerical breakdowns from
 * SolverError.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace brainstorm {

/// Base class for malformed inputs (bad domain, infeasible parameters, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the mathematical domain of the function.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Model parameters violate a feasibility bound (cost too high, ...).
class FeasibilityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A structural modelling assumption (FOSD, patience ordering, ...) fails.
class PreconditionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A query falls outside the range covered by a solved object.
class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Numerical failure: no bracket, no convergence, divergent tail.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace detail

}  // namespace brainstorm
