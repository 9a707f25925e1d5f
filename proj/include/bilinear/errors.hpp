#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bilinear {

/// Argument outside the mathematical domain of an operation (negative modulus,
/// non-SPD matrix, p < 2, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested derivative does not exist classically at the given point.
class SingularityError : public std::runtime_error {
public:
    enum class Set { VAxis, Interface, ZeroModulus };

    SingularityError(Set set, const std::string& what) : std::runtime_error(what), set_(set) {}

    Set set() const noexcept { return set_; }

private:
    Set set_;
};

/// Quadrature or discretisation resolution insufficient for the requested tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}

    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

/// Operand shapes do not match (grid sizes, snapshot counts, ...).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative solver failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::size_t iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

/// Invalid construction input (inadmissible coefficient field, bad geometry).
class ConstructionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace bilinear
