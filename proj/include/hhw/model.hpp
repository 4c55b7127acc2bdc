#pragma once

#include <optional>
#include <vector>

namespace hhw {

// ============================================================================
// Market curve
// ============================================================================

/// Zero-coupon curve, either flat or tabulated as continuously compounded
/// zero rates. Tabulated curves interpolate log discount factors linearly
/// (piecewise-flat forwards), with the first segment anchored at P(0,0)=1 and
/// the last segment's forward extended beyond the final pillar.
class YieldCurve {
public:
    static YieldCurve flat(double rate);
    static YieldCurve table(std::vector<double> times, std::vector<double> zero_rates);

    [[nodiscard]] bool is_flat() const { return times_.empty(); }
    [[nodiscard]] double discount(double t) const;
    [[nodiscard]] double zero_rate(double t) const;
    /// Instantaneous forward f(0,t). Exact for flat curves; centered
    /// difference of -ln P with step 1e-5 for tables.
    [[nodiscard]] double forward(double t) const;

    [[nodiscard]] const std::vector<double>& times() const { return times_; }
    [[nodiscard]] const std::vector<double>& zero_rates() const { return rates_; }
    [[nodiscard]] double flat_rate() const { return flat_; }

private:
    YieldCurve() = default;
    [[nodiscard]] double log_discount(double t) const;

    double flat_ = 0.0;
    std::vector<double> times_;
    std::vector<double> rates_;
};

// ============================================================================
// Model parameters
// ============================================================================

/// Heston–Hull-White: stochastic variance V (CIR), short rate r = sigmaR X + phi
/// with X a unit-volatility OU factor, constant dividend yield eta.
struct ModelParams {
    double S0 = 100.0;
    double V0 = 0.1;
    double r0 = 0.04;
    double eta = 0.0;
    double kappaV = 1.0;
    double thetaV = 0.1;
    double sigmaV = 0.3;
    double kappaR = 1.0;
    double sigmaR = 0.0;
    double rho1 = 0.0;     // corr(S, V)
    double rho2 = 0.0;     // corr(S, r)
    double alphaVX = 0.0;  // corr(V, X)
    YieldCurve curveR = YieldCurve::flat(0.04);

    /// Throws DomainError when an invariant is violated.
    void validate() const;
    /// 1 - rho1^2 - rho2^2, the squared weight of the idiosyncratic equity noise.
    [[nodiscard]] double rho_perp2() const { return 1.0 - rho1 * rho1 - rho2 * rho2; }
    [[nodiscard]] double rho3() const;
};

/// Heston–Hull-White2d: as ModelParams with a stochastic dividend
/// eta = sigmaEta X^eta + phi_eta. V, X^r and X^eta are mutually uncorrelated.
struct ModelParams2d {
    double S0 = 100.0;
    double V0 = 0.1;
    double r0 = 0.04;
    double eta0 = 0.03;
    double kappaV = 1.0;
    double thetaV = 0.1;
    double sigmaV = 0.3;
    double kappaR = 1.0;
    double sigmaR = 0.0;
    double kappaEta = 1.0;
    double sigmaEta = 0.0;
    double rho1 = 0.0;   // corr(S, V)
    double rho2 = 0.0;   // corr(S, r)
    double rho3c = 0.0;  // corr(S, eta)
    YieldCurve curveR = YieldCurve::flat(0.04);
    YieldCurve curveEta = YieldCurve::flat(0.03);

    void validate() const;
    [[nodiscard]] double rho_perp2() const {
        return 1.0 - rho1 * rho1 - rho2 * rho2 - rho3c * rho3c;
    }
    [[nodiscard]] double rho4() const;
};

// ============================================================================
// Contracts
// ============================================================================

enum class PayoffKind { call, put };
enum class ExerciseKind { european, american };

struct OptionSpec {
    PayoffKind payoff = PayoffKind::call;
    ExerciseKind exercise = ExerciseKind::european;
    double strike = 100.0;
    double maturity = 1.0;
    std::optional<double> upAndOut;  // barrier level H

    void validate() const;
    [[nodiscard]] double intrinsic(double spot) const;
};

// ============================================================================
// Drifts
// ============================================================================

/// Hull-White deterministic shift fitted to `curve`:
/// f(0,t) + sigma^2 (1 - e^{-kappa t})^2 / (2 kappa^2).
/// `r0_or_eta0` is the factor's initial value; it is implied by the curve and
/// only checked for finiteness.
[[nodiscard]] double phi_shift(const YieldCurve& curve, double kappa, double sigma,
                               double r0_or_eta0, double t);

[[nodiscard]] inline double drift_v(const ModelParams& p, double v) {
    return p.kappaV * (p.thetaV - v);
}

[[nodiscard]] inline double drift_x(double kappa, double x) { return -kappa * x; }

/// Drift of the log-price after removing the V and X martingale parts.
[[nodiscard]] double effective_drift(const ModelParams& p, double v, double x, double t);

[[nodiscard]] double effective_drift_2d(const ModelParams2d& p, double v, double x1,
                                        double x2, double t);

/// effective_drift with the curve shift(s) supplied by the caller; used in
/// inner loops where phi is tabulated per time step.
[[nodiscard]] double effective_drift_at(const ModelParams& p, double v, double x,
                                        double phi_r);
[[nodiscard]] double effective_drift_2d_at(const ModelParams2d& p, double v, double x1,
                                           double x2, double phi_r, double phi_eta);

}  // namespace hhw
