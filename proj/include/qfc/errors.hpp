#pragma once

#include <stdexcept>
#include <string>

namespace qfc {

// A step-doubling or order-refinement check failed.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double measured, double tolerance)
        : std::runtime_error(what), measured_(measured), tolerance_(tolerance) {}
    double measured() const noexcept { return measured_; }
    double tolerance() const noexcept { return tolerance_; }

private:
    double measured_;
    double tolerance_;
};

// A matrix that should be unitary is not, or a singular value exceeds one.
class UnitarityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Frequency grid truncates a non-negligible part of an amplitude.
class GridCoverageError : public std::runtime_error {
public:
    GridCoverageError(const std::string& what, double edge_to_peak)
        : std::runtime_error(what), edge_to_peak_(edge_to_peak) {}
    double edge_to_peak() const noexcept { return edge_to_peak_; }

private:
    double edge_to_peak_;
};

class GridMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InfeasibleDesign : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace qfc
