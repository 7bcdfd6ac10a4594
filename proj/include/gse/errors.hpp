#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gse {

// Bad input: shapes, domains, matrix invariants.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure that is not the caller's fault.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BudgetExceeded : public NumericalError {
public:
    BudgetExceeded(const std::string& what, std::vector<double> estimate, double error_bound)
        : NumericalError(what), estimate_(std::move(estimate)), error_bound_(error_bound) {}

    const std::vector<double>& estimate() const { return estimate_; }
    double error_bound() const { return error_bound_; }

private:
    std::vector<double> estimate_;
    double error_bound_;
};

class DegenerateRegion : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientMass : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BracketFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace gse
