#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hhw/errors.hpp"
#include "hhw/pricer.hpp"

namespace {

using hhw::Contract;
using hhw::HybridPricer;
using hhw::ModelParams;
using hhw::ModelParams2d;
using hhw::PricerOptions;
using hhw::YieldCurve;

ModelParams params(double rho2) {
    ModelParams p;
    p.S0 = 100;
    p.V0 = 0.1;
    p.r0 = 0.04;
    p.eta = 0.03;
    p.kappaV = 2;
    p.thetaV = 0.1;
    p.sigmaV = 0.3;
    p.kappaR = 1;
    p.sigmaR = 0.2;
    p.rho1 = -0.5;
    p.rho2 = rho2;
    p.curveR = YieldCurve::flat(0.04);
    return p;
}

Contract call(double K, double T, bool american = false) {
    hhw::OptionSpec s;
    s.strike = K;
    s.maturity = T;
    s.exercise = american ? hhw::ExerciseKind::american : hhw::ExerciseKind::european;
    return hhw::make_contract(s);
}

// Quadratic Lagrange interpolation at fractional index `pos`, rewritten
// independently of the library.
double lagrange_at(const std::vector<double>& f, double pos) {
    const int last = static_cast<int>(f.size()) - 1;
    if (pos <= 0) return f[0];
    if (pos >= last) return f[last];
    int c = static_cast<int>(std::floor(pos + 0.5));
    c = std::clamp(c, 1, last - 1);
    const double x[3]{c - 1.0, double(c), c + 1.0};
    double s = 0;
    for (int a = 0; a < 3; ++a) {
        double w = 1;
        for (int b = 0; b < 3; ++b)
            if (b != a) w *= (pos - x[b]) / (x[a] - x[b]);
        s += w * f[c - 1 + a];
    }
    return s;
}

std::vector<double> dense_implicit_solve(int n, double a, double b, std::vector<double> r) {
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        A[i][i] = 1 + 2 * b;
        if (i == 0) A[0][1] = -2 * b;
        else if (i == n - 1) A[i][i - 1] = -2 * b;
        else {
            A[i][i - 1] = -b + a;
            A[i][i + 1] = -b - a;
        }
    }
    for (int c = 0; c < n; ++c)
        for (int row = c + 1; row < n; ++row) {
            const double f = A[row][c] / A[c][c];
            for (int k = c; k < n; ++k) A[row][k] -= f * A[c][k];
            r[row] -= f * r[c];
        }
    std::vector<double> x(n);
    for (int row = n - 1; row >= 0; --row) {
        double s = r[row];
        for (int k = row + 1; k < n; ++k) s -= A[row][k] * x[k];
        x[row] = s / A[row][row];
    }
    return x;
}

PricerOptions single_thread() {
    PricerOptions o;
    o.threads = 1;
    return o;
}

}  // namespace

TEST(TerminalValues, CallPayoffAndKnockOut) {
    hhw::OptionSpec s;
    s.strike = 100;
    const hhw::SpaceGrid at_strike(std::log(100.0), 2, 0.1);
    EXPECT_NEAR(hhw::terminal_values(at_strike, s)[2], 0.0, 1e-12);
    const hhw::SpaceGrid at_140(std::log(140.0), 2, 0.1);
    EXPECT_NEAR(hhw::terminal_values(at_140, s)[2], 40.0, 1e-12);
    s.upAndOut = 130;
    const hhw::SpaceGrid at_135(std::log(135.0), 2, 0.01);
    const auto t = hhw::terminal_values(at_135, s);
    EXPECT_EQ(t[2], 0.0);
    EXPECT_EQ(t[4], 0.0);
}

TEST(ShiftInterpolate, ZeroShiftIsIdentity) {
    const hhw::SpaceGrid g(0.0, 6, 0.1);
    std::vector<double> f(g.size());
    for (int s = 0; s < g.size(); ++s) f[s] = std::sin(3 * g.y(s)) + s;
    EXPECT_EQ(hhw::shift_interpolate(f, g, 0.0), f);
}

TEST(ShiftInterpolate, WholeStepShiftsIndex) {
    const hhw::SpaceGrid g(0.0, 5, 0.2);
    std::vector<double> f(g.size());
    for (int s = 0; s < g.size(); ++s) f[s] = s * s - 3.0 * s + 1.0;
    const auto up = hhw::shift_interpolate(f, g, 0.2);
    for (int s = 0; s + 1 < g.size(); ++s) EXPECT_NEAR(up[s], f[s + 1], 1e-12);
    EXPECT_EQ(up.back(), f.back());
    const auto down = hhw::shift_interpolate(f, g, -0.2);
    for (int s = 1; s < g.size(); ++s) EXPECT_NEAR(down[s], f[s - 1], 1e-12);
    EXPECT_EQ(down.front(), f.front());
}

TEST(ShiftInterpolate, ReproducesQuadratics) {
    const hhw::SpaceGrid g(4.6, 40, 0.03);
    std::vector<double> f(g.size());
    for (int s = 0; s < g.size(); ++s) f[s] = g.y(s) * g.y(s);
    for (double shift : {-0.31, -0.047, 0.0133, 0.2}) {
        const auto w = hhw::shift_interpolate(f, g, shift);
        for (int s = 0; s < g.size(); ++s) {
            const double z = g.y(s) + shift;
            if (z < g.y(0) || z > g.y(g.size() - 1)) continue;
            EXPECT_NEAR(w[s], z * z, 1e-10) << "shift=" << shift << " s=" << s;
        }
    }
}

TEST(ShiftInterpolate, MatchesIndependentLagrange) {
    const hhw::SpaceGrid g(0.0, 20, 0.05);
    std::vector<double> f(g.size());
    for (int s = 0; s < g.size(); ++s) f[s] = std::exp(g.y(s)) + std::cos(7 * g.y(s));
    for (double shift : {-1.3, -0.07, 0.024, 0.51, 2.0}) {
        const auto w = hhw::shift_interpolate(f, g, shift);
        for (int s = 0; s < g.size(); ++s)
            EXPECT_NEAR(w[s], lagrange_at(f, s + shift / g.dy), 1e-13);
    }
}

TEST(ShiftInterpolate, CutoffLeavesKnockedOutPointsEmpty) {
    std::vector<double> f(11, 1.0), out(11, 0.0);
    hhw::shift_interpolate_accumulate(f, 0.1, 0.25, 2.0, out, 8.0);
    // Shifted position s + 2.5 reaches 8 from s = 6 on.
    for (int s = 0; s < 6; ++s) EXPECT_DOUBLE_EQ(out[s], 2.0);
    for (int s = 6; s < 11; ++s) EXPECT_EQ(out[s], 0.0);
}

TEST(BackwardStep, ZeroPayoffStaysZero) {
    Contract c;
    c.payoff = [](double) { return 0.0; };
    HybridPricer pr(params(0.5), c, 6, 20, single_thread());
    const auto root = pr.run();
    for (double x : root.at(0, 0)) EXPECT_EQ(x, 0.0);
}

TEST(BackwardStep, ConstantIsDiscountedOnly) {
    ModelParams p = params(0.5);
    p.sigmaR = 0;
    Contract c;
    c.payoff = [](double) { return 2.5; };
    for (bool martingale : {false, true}) {
        PricerOptions o = single_thread();
        o.martingaleDrift = martingale;
        HybridPricer pr(p, c, 8, 30, o);
        const hhw::ValueSurface last = pr.terminal_surface();
        const hhw::ValueSurface prev = pr.backward_step(last, 7);
        const double expect = 2.5 * std::exp(-0.04 * pr.step());
        for (int k = 0; k <= 7; ++k)
            for (int j = 0; j <= 7; ++j)
                for (double x : prev.at(k, j)) ASSERT_NEAR(x, expect, 1e-12);
    }
}

TEST(BackwardStep, OneStepMatchesDenseEnumeration) {
    const ModelParams p = params(0.5);
    const Contract c = call(100, 0.5);
    const double h = 0.5;

    // Successor values and one-step probabilities written from the lattice formulas.
    const double sh = std::sqrt(h);
    const double vu = std::pow(std::sqrt(p.V0) + 0.5 * p.sigmaV * sh, 2);
    const double vd = std::pow(std::sqrt(p.V0) - 0.5 * p.sigmaV * sh, 2);
    const double pv = (p.V0 + p.kappaV * (p.thetaV - p.V0) * h - vd) / (vu - vd);
    const double px = 0.5;
    const double vs[2]{vu, vd}, xs[2]{sh, -sh}, pvs[2]{pv, 1 - pv}, pxs[2]{px, 1 - px};

    for (bool martingale : {false, true}) {
        PricerOptions o = single_thread();
        o.martingaleDrift = martingale;
        HybridPricer pr(p, c, 1, 16, o);
        const hhw::SpaceGrid& g = pr.grid();
        const int G = g.size();

        std::vector<double> psi(G);
        for (int s = 0; s < G; ++s) psi[s] = std::max(std::exp(g.y(s)) - 100.0, 0.0);

        std::vector<double> rhs(G, 0.0);
        double growth = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const double shift =
                    p.rho1 / p.sigmaV * (vs[a] - p.V0) + p.rho2 * std::sqrt(p.V0) * xs[b];
                growth += pvs[a] * pxs[b] * std::exp(shift);
                for (int s = 0; s < G; ++s)
                    rhs[s] += pvs[a] * pxs[b] * lagrange_at(psi, s + shift / g.dy);
            }
        const double disc = std::exp(-0.04 * h);
        const double beta = h * p.rho_perp2() * p.V0 / (2 * g.dy * g.dy);
        double alpha = h * hhw::effective_drift(p, p.V0, 0.0, 0.0) / (2 * g.dy);
        if (martingale) {
            // Interior rows map exp(y) to a exp(y); require disc * growth / a = exp(-eta h).
            const double a = disc * growth * std::exp(p.eta * h);
            const double ep = std::exp(g.dy), em = std::exp(-g.dy);
            alpha = (1 - a - beta * (ep + em - 2)) / (ep - em);
        }
        std::vector<double> u = dense_implicit_solve(G, alpha, beta, rhs);
        for (double& x : u) x *= disc;

        const auto root = pr.run();
        for (int s = 0; s < G; ++s)
            EXPECT_NEAR(root.at(0, 0)[s], u[s], 1e-12) << "s=" << s << " martingale=" << martingale;
    }
}

TEST(BackwardStep, MartingaleDriftReproducesForward) {
    const ModelParams p = params(-0.5);
    Contract c;
    c.payoff = [](double s) { return s; };
    c.maturity = 1.0;
    PricerOptions o = single_thread();
    o.martingaleDrift = true;
    const double forward = 100 * std::exp(-0.03);
    const HybridPricer with(p, c, 20, 400, o);
    const double corrected = with.root_value(with.run());
    o.martingaleDrift = false;
    const HybridPricer without(p, c, 20, 400, o);
    const double plain = without.root_value(without.run());
    // Only interpolation error of exp(y) remains with the corrected drift.
    EXPECT_NEAR(corrected, forward, 1e-5 * forward) << "plain " << plain;
    EXPECT_GT(std::abs(plain - forward), 10 * std::abs(corrected - forward));
}

TEST(Pricer, AmericanDominatesEuropeanPointwise) {
    for (double rho2 : {-0.5, 0.5}) {
        const ModelParams p = params(rho2);
        HybridPricer eu(p, call(100, 1), 30, 40);
        HybridPricer am(p, call(100, 1, true), 30, 40);
        const auto e = eu.run(), a = am.run();
        for (int s = 0; s < eu.grid().size(); ++s) EXPECT_GE(a.at(0, 0)[s], e.at(0, 0)[s] - 1e-12);
    }
}

TEST(Pricer, CallPriceNonIncreasingInStrike) {
    const ModelParams p = params(0.0);
    double prev = 1e300;
    for (double K : {70.0, 100.0, 140.0}) {
        hhw::OptionSpec s;
        s.strike = K;
        const double price = hhw::price_hhw(p, s, 20, 40).price;
        EXPECT_LE(price, prev);
        prev = price;
    }
}

TEST(Pricer, BarrierBelowVanillaPointwise) {
    const ModelParams p = params(-0.5);
    Contract ko = call(100, 1);
    ko.upAndOut = 130;
    HybridPricer vanilla(p, call(100, 1), 30, 60);
    const auto v = vanilla.run();
    for (auto mode : {hhw::BarrierMode::projection, hhw::BarrierMode::dirichlet}) {
        PricerOptions o;
        o.barrier = mode;
        HybridPricer barrier(p, ko, 30, 60, o);
        const auto b = barrier.run();
        for (int s = 0; s < vanilla.grid().size(); ++s) {
            EXPECT_LE(b.at(0, 0)[s], v.at(0, 0)[s] + 1e-12);
            if (std::exp(vanilla.grid().y(s)) >= 130.0) EXPECT_EQ(b.at(0, 0)[s], 0.0);
        }
    }
}

TEST(Pricer, ContinuousMonitoringIsCheaperThanDiscrete) {
    const ModelParams p = params(-0.5);
    hhw::OptionSpec s;
    s.upAndOut = 130;
    PricerOptions discrete, continuous;
    continuous.barrier = hhw::BarrierMode::dirichlet;
    EXPECT_LT(hhw::price_hhw(p, s, 40, 80, continuous).price, hhw::price_hhw(p, s, 40, 80, discrete).price);
}

TEST(Pricer, ThreadCountDoesNotChangeResult) {
    const ModelParams p = params(0.5);
    hhw::OptionSpec s;
    s.exercise = hhw::ExerciseKind::american;
    PricerOptions one, many;
    one.threads = 1;
    many.threads = 5;
    EXPECT_EQ(hhw::price_hhw(p, s, 24, 40, one).price, hhw::price_hhw(p, s, 24, 40, many).price);
}

TEST(Pricer, DeterministicDividendTwoFactorReducesToOneFactor) {
    ModelParams p1 = params(0.5);
    ModelParams2d p2;
    p2.S0 = p1.S0;
    p2.V0 = p1.V0;
    p2.r0 = p1.r0;
    p2.eta0 = 0.03;
    p2.kappaV = p1.kappaV;
    p2.thetaV = p1.thetaV;
    p2.sigmaV = p1.sigmaV;
    p2.kappaR = p1.kappaR;
    p2.sigmaR = p1.sigmaR;
    p2.kappaEta = 1;
    p2.sigmaEta = 0;
    p2.rho1 = p1.rho1;
    p2.rho2 = p1.rho2;
    p2.rho3c = 0;
    p2.curveR = p1.curveR;
    p2.curveEta = YieldCurve::flat(0.03);
    hhw::OptionSpec s;
    for (bool martingale : {false, true}) {
        PricerOptions o;
        o.martingaleDrift = martingale;
        const double one = hhw::price_hhw(p1, s, 16, 30, o).price;
        const double two = hhw::price_hhw2d(p2, s, 16, 30, o).price;
        EXPECT_NEAR(two, one, 1e-6);
    }
}

TEST(Pricer, ReportsImpliedVolForEuropeanCalls) {
    hhw::OptionSpec s;
    const auto r = hhw::price_hhw(params(0.0), s, 20, 40);
    ASSERT_TRUE(r.impliedVol.has_value());
    EXPECT_GT(*r.impliedVol, 0.2);
    s.exercise = hhw::ExerciseKind::american;
    EXPECT_FALSE(hhw::price_hhw(params(0.0), s, 20, 40).impliedVol.has_value());
}

TEST(Pricer, InvalidInputs) {
    hhw::OptionSpec s;
    EXPECT_THROW((void)hhw::price_hhw(params(0), s, 10, 31), hhw::DomainError);
    EXPECT_THROW((void)hhw::price_hhw(params(0), s, 0, 30), hhw::DomainError);
    s.upAndOut = 130;
    s.exercise = hhw::ExerciseKind::american;
    EXPECT_THROW((void)hhw::price_hhw(params(0), s, 10, 30), hhw::DomainError);
}
