#pragma once

#include <variant>
#include <vector>

namespace sharpe {

// ============================================================================
// CoefficientFn: drift/volatility coefficient of one state variable
// ============================================================================

/// A model coefficient f(state, t). Three closed forms are supported so that
/// specs serialize exactly: a constant, a piecewise-linear table in the state
/// (clamped outside its hull), and c0 + c1 * ln(state). None of the kinds
/// depend on t; the argument is kept so call sites read like the model.
class CoefficientFn {
public:
    struct Constant {
        double value = 0.0;
    };
    struct Tabulated {
        std::vector<double> grid;
        std::vector<double> values;
    };
    struct AffineInLog {
        double c0 = 0.0;
        double c1 = 0.0;
    };
    using Kind = std::variant<Constant, Tabulated, AffineInLog>;

    CoefficientFn() : kind_(Constant{0.0}) {}

    static CoefficientFn constant(double value);
    /// grid must be strictly increasing and the same length as values (>= 1).
    static CoefficientFn tabulated(std::vector<double> grid, std::vector<double> values);
    static CoefficientFn affine_in_log(double c0, double c1);

    /// Throws DomainError for affine-in-log evaluated at state <= 0.
    [[nodiscard]] double operator()(double state, double t = 0.0) const;

    [[nodiscard]] bool is_constant() const noexcept;
    /// Value of a constant coefficient; throws UnsupportedError otherwise.
    [[nodiscard]] double constant_value() const;

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }

    /// Largest |df/d(ln state)| over the state interval [lo, hi], exact for the
    /// piecewise-linear and affine-in-log kinds.
    [[nodiscard]] double log_lipschitz_bound(double lo, double hi) const;
    /// Largest |df/d state| over [lo, hi]; for the volatility factor, which is
    /// not log-transformed.
    [[nodiscard]] double lipschitz_bound(double lo, double hi) const;

private:
    explicit CoefficientFn(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

}  // namespace sharpe
