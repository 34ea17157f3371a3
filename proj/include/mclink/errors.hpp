#pragma once

#include <stdexcept>
#include <string>

namespace mclink {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration detected before any computation starts.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A Gaussian pulse never rises above the threshold supply.
class NoCrossingError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A root or band search found no admissible point.
class SearchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical quadrature did not reach the requested tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    [[nodiscard]] double achieved_bound() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// The finite-difference solution left its admissible range.
class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mclink
