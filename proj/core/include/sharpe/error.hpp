#pragma once

#include <stdexcept>
#include <string>

namespace sharpe {

/// Input outside the mathematical domain of an operation (S <= 0, sigma <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed grid, config or model description.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Valid request that the chosen route cannot serve (e.g. closed form for a custom payoff).
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// |rho| = 1 in a two-factor solve: the diffusion is not uniformly elliptic.
class DegenerateEllipticityError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Policy iteration failed to reach a fixed point.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

}  // namespace sharpe
