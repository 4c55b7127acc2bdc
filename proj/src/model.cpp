#include "hhw/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hhw/errors.hpp"

namespace hhw {

namespace {

constexpr double kForwardStep = 1e-5;
constexpr double kMinSigmaV = 1e-8;

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace

// ----------------------------------------------------------------------------
// YieldCurve
// ----------------------------------------------------------------------------

YieldCurve YieldCurve::flat(double rate) {
    require(std::isfinite(rate), "flat curve rate must be finite");
    YieldCurve c;
    c.flat_ = rate;
    return c;
}

YieldCurve YieldCurve::table(std::vector<double> times, std::vector<double> zero_rates) {
    require(!times.empty(), "curve table must have at least one pillar");
    require(times.size() == zero_rates.size(), "curve table: times and rates differ in length");
    require(times.front() > 0.0, "curve table: first time must be > 0");
    for (std::size_t i = 0; i < times.size(); ++i) {
        require(std::isfinite(times[i]) && std::isfinite(zero_rates[i]),
                "curve table entries must be finite");
        if (i > 0) require(times[i] > times[i - 1], "curve table times must be strictly increasing");
    }
    YieldCurve c;
    c.times_ = std::move(times);
    c.rates_ = std::move(zero_rates);
    return c;
}

double YieldCurve::log_discount(double t) const {
    if (is_flat()) return -flat_ * t;
    if (t <= 0.0) return 0.0;
    // Knots (0, 0), (t_i, -z_i t_i); linear in between, last slope beyond.
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    double t0 = 0.0, l0 = 0.0, t1 = 0.0, l1 = 0.0;
    if (hi == 0) {
        t1 = times_[0];
        l1 = -rates_[0] * times_[0];
    } else if (hi == times_.size()) {
        if (times_.size() == 1) return -rates_[0] * t;
        t0 = times_[hi - 2];
        l0 = -rates_[hi - 2] * t0;
        t1 = times_[hi - 1];
        l1 = -rates_[hi - 1] * t1;
    } else {
        t0 = times_[hi - 1];
        l0 = -rates_[hi - 1] * t0;
        t1 = times_[hi];
        l1 = -rates_[hi] * t1;
    }
    return l0 + (l1 - l0) * (t - t0) / (t1 - t0);
}

double YieldCurve::discount(double t) const { return std::exp(log_discount(t)); }

double YieldCurve::zero_rate(double t) const {
    if (is_flat()) return flat_;
    if (t <= 0.0) return rates_.front();
    return -log_discount(t) / t;
}

double YieldCurve::forward(double t) const {
    if (is_flat()) return flat_;
    const double lo = std::max(0.0, t - kForwardStep);
    const double hi = t + kForwardStep;
    return -(log_discount(hi) - log_discount(lo)) / (hi - lo);
}

// ----------------------------------------------------------------------------
// Parameters
// ----------------------------------------------------------------------------

void ModelParams::validate() const {
    require(S0 > 0.0 && std::isfinite(S0), "S0 must be > 0");
    require(V0 >= 0.0 && std::isfinite(V0), "V0 must be >= 0");
    require(std::isfinite(r0) && std::isfinite(eta), "r0 and eta must be finite");
    require(kappaV >= 0.0 && thetaV >= 0.0, "kappaV and thetaV must be >= 0");
    require(sigmaV >= kMinSigmaV, "sigmaV must be >= 1e-8");
    require(kappaR > 0.0, "kappaR must be > 0");
    require(sigmaR >= 0.0, "sigmaR must be >= 0");
    require(rho1 * rho1 + rho2 * rho2 < 1.0, "rho1^2 + rho2^2 must be < 1");
    require(std::abs(alphaVX) < 1.0, "|alphaVX| must be < 1");
}

double ModelParams::rho3() const { return std::sqrt(rho_perp2()); }

void ModelParams2d::validate() const {
    require(S0 > 0.0 && std::isfinite(S0), "S0 must be > 0");
    require(V0 >= 0.0 && std::isfinite(V0), "V0 must be >= 0");
    require(std::isfinite(r0) && std::isfinite(eta0), "r0 and eta0 must be finite");
    require(kappaV >= 0.0 && thetaV >= 0.0, "kappaV and thetaV must be >= 0");
    require(sigmaV >= kMinSigmaV, "sigmaV must be >= 1e-8");
    require(kappaR > 0.0 && kappaEta > 0.0, "kappaR and kappaEta must be > 0");
    require(sigmaR >= 0.0 && sigmaEta >= 0.0, "sigmaR and sigmaEta must be >= 0");
    require(rho1 * rho1 + rho2 * rho2 + rho3c * rho3c < 1.0,
            "rho1^2 + rho2^2 + rho3^2 must be < 1");
}

double ModelParams2d::rho4() const { return std::sqrt(rho_perp2()); }

void OptionSpec::validate() const {
    require(strike > 0.0 && std::isfinite(strike), "strike must be > 0");
    require(maturity > 0.0 && std::isfinite(maturity), "maturity must be > 0");
    if (upAndOut) {
        require(*upAndOut > 0.0, "barrier must be > 0");
        require(exercise == ExerciseKind::european, "barrier requires european exercise");
    }
}

double OptionSpec::intrinsic(double spot) const {
    const double v = payoff == PayoffKind::call ? spot - strike : strike - spot;
    return v > 0.0 ? v : 0.0;
}

// ----------------------------------------------------------------------------
// Drifts
// ----------------------------------------------------------------------------

double phi_shift(const YieldCurve& curve, double kappa, double sigma, double r0_or_eta0,
                 double t) {
    require(t >= 0.0, "phi_shift: t must be >= 0");
    require(std::isfinite(r0_or_eta0), "phi_shift: initial value must be finite");
    require(kappa > 0.0, "phi_shift: kappa must be > 0");
    const double g = 1.0 - std::exp(-kappa * t);
    return curve.forward(t) + sigma * sigma / (2.0 * kappa * kappa) * g * g;
}

double effective_drift_at(const ModelParams& p, double v, double x, double phi_r) {
    return p.sigmaR * x + phi_r - p.eta - 0.5 * v - (p.rho1 / p.sigmaV) * drift_v(p, v) +
           p.rho2 * p.kappaR * x * std::sqrt(v);
}

double effective_drift(const ModelParams& p, double v, double x, double t) {
    require(v >= 0.0, "effective_drift: v must be >= 0");
    return effective_drift_at(p, v, x, phi_shift(p.curveR, p.kappaR, p.sigmaR, p.r0, t));
}

double effective_drift_2d_at(const ModelParams2d& p, double v, double x1, double x2,
                             double phi_r, double phi_eta) {
    const double sv = std::sqrt(v);
    return p.sigmaR * x1 + phi_r - p.sigmaEta * x2 - phi_eta - 0.5 * v -
           (p.rho1 / p.sigmaV) * p.kappaV * (p.thetaV - v) + p.rho2 * p.kappaR * x1 * sv +
           p.rho3c * p.kappaEta * x2 * sv;
}

double effective_drift_2d(const ModelParams2d& p, double v, double x1, double x2, double t) {
    require(v >= 0.0, "effective_drift_2d: v must be >= 0");
    return effective_drift_2d_at(p, v, x1, x2,
                                 phi_shift(p.curveR, p.kappaR, p.sigmaR, p.r0, t),
                                 phi_shift(p.curveEta, p.kappaEta, p.sigmaEta, p.eta0, t));
}

}  // namespace hhw
