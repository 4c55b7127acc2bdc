// End-to-end acceptance run: one PASS/FAIL line per criterion. Exits non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hhw/analytics.hpp"
#include "hhw/fd_solver.hpp"
#include "hhw/hybrid_mc.hpp"
#include "hhw/lattice.hpp"
#include "hhw/pricer.hpp"

namespace {

using hhw::ModelParams;
using hhw::OptionSpec;

// Tolerances, pinned.
constexpr double kEuropeanTol = 0.05;
constexpr double kVolTol = 5e-3;
constexpr double kAmericanTol = 0.06;
constexpr double kLongMaturityTol = 0.15;
constexpr double kSkewTol = 0.25;
constexpr double kBarrierTol = 0.05;
constexpr double kTwoFactorTol = 0.10;
constexpr double kReductionTol = 1e-6;
constexpr double kMaxSecondsPerPrice = 60.0;
constexpr double kMaxHalfWidth = 0.12;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s | %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

ModelParams base(double rho2) {
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
    p.curveR = hhw::YieldCurve::flat(0.04);
    return p;
}

// Feller condition violated: 2 kappaV thetaV = 0.18 < sigmaV^2 = 1.
ModelParams feller_violated(double rho1) {
    ModelParams p = base(0.0);
    p.V0 = 0.09;
    p.thetaV = 0.09;
    p.kappaV = 1;
    p.sigmaV = 1;
    p.rho1 = rho1;
    return p;
}

OptionSpec option(double K, double T, bool american = false, bool put = false) {
    OptionSpec s;
    s.strike = K;
    s.maturity = T;
    s.exercise = american ? hhw::ExerciseKind::american : hhw::ExerciseKind::european;
    s.payoff = put ? hhw::PayoffKind::put : hhw::PayoffKind::call;
    return s;
}

struct Check {
    bool ok = true;
    std::string detail;
    void add(double got, double want, double tol, const char* label = "") {
        const bool pass = std::abs(got - want) <= tol;
        ok = ok && pass;
        if (!detail.empty()) detail += "; ";
        detail += std::string(label) + fmt("%.6f", got) + " vs " + fmt("%.6f", want) +
                  (pass ? "" : " (off by " + fmt("%+.4f", got - want) + ")");
    }
};

void european_and_vols() {
    const double rho[3]{-0.5, 0.0, 0.5};
    const double price_ref[3]{11.34, 12.77, 14.04};
    const double vol_ref[3]{0.282602, 0.320169, 0.353623};
    Check prices, vols;
    double slowest = 0.0;
    for (int i = 0; i < 3; ++i) {
        const auto r = hhw::price_hhw(base(rho[i]), option(100, 1), 200, 200);
        slowest = std::max(slowest, r.wallTime);
        prices.add(r.price, price_ref[i], kEuropeanTol);
        vols.add(r.impliedVol.value_or(NAN), vol_ref[i], kVolTol);
    }
    const bool fast = slowest <= kMaxSecondsPerPrice;
    report(1, "European calls, Nt=Ns=200, tol 0.05, <= 60 s each", prices.ok && fast,
           prices.detail + fmt("; slowest %.1f s", slowest));
    report(2, "implied vols of the European calls, tol 5e-3", vols.ok, vols.detail);
}

void american() {
    const double rho[3]{-0.5, 0.0, 0.5};
    const double ref[3]{12.22, 13.16, 14.15};
    Check c;
    for (int i = 0; i < 3; ++i)
        c.add(hhw::price_hhw(base(rho[i]), option(100, 1, true), 200, 200).price, ref[i], kAmericanTol);
    report(3, "American calls, Nt=Ns=200, tol 0.06", c.ok, c.detail);
}

void long_maturity() {
    const double K[3]{70, 100, 140};
    const double ref[3]{37.491811, 24.706195, 14.324566};
    Check c;
    for (int i = 0; i < 3; ++i)
        c.add(hhw::price_hhw(feller_violated(-0.3), option(K[i], 5), 50, 200).price, ref[i],
              kLongMaturityTol);
    report(4, "T=5 Feller-violated calls, Nt=50 Ns=200, tol 0.15", c.ok, c.detail);
}

void strong_skew() {
    ModelParams p = base(0.0);
    p.V0 = 0.04;
    p.thetaV = 0.04;
    p.kappaV = 0.5;
    p.sigmaV = 1;
    p.rho1 = -0.9;
    const double K[3]{70, 100, 140};
    const double ref[3]{34.101622, 23.140518, 13.755466};
    Check c;
    for (int i = 0; i < 3; ++i)
        c.add(hhw::price_hhw(p, option(K[i], 10), 200, 200).price, ref[i], kSkewTol);
    report(5, "T=10 strong-skew calls, Nt=Ns=200, tol 0.25", c.ok, c.detail);
}

void barrier() {
    OptionSpec s = option(100, 1);
    s.upAndOut = 130;
    hhw::PricerOptions o;
    o.barrier = hhw::BarrierMode::dirichlet;
    Check c;
    c.add(hhw::price_hhw(base(-0.5), s, 200, 200, o).price, 1.947565, kBarrierTol);
    report(6, "up-and-out call H=130, continuous monitoring, Nt=Ns=200, tol 0.05", c.ok, c.detail);
}

void ratios() {
    auto table = [](const ModelParams& p) {
        std::vector<double> prices;
        for (int Nt = 25; Nt <= 400; Nt *= 2)
            prices.push_back(hhw::price_hhw(p, option(100, 0.25, true, true), Nt, 2 * Nt).price);
        std::vector<double> r;
        for (std::size_t i = 2; i < prices.size(); ++i)
            r.push_back(hhw::convergence_ratio(prices[i - 2], prices[i - 1], prices[i]));
        return r;
    };
    auto describe = [](const std::vector<double>& r, double lo, double hi, bool& ok) {
        std::string s;
        for (double x : r) {
            ok = ok && x >= lo && x <= hi;
            s += (s.empty() ? "" : " ") + fmt("%.3f", x);
        }
        return s + fmt(" in [%.1f,", lo) + fmt("%.1f]", hi);
    };
    bool ok = true;
    const std::string a = describe(table(base(0.5)), 1.6, 3.0, ok);
    const std::string b = describe(table(feller_violated(-0.3)), 1.3, 3.6, ok);
    report(7, "American put convergence ratios, K=100, Nt up to 400", ok,
           "Feller satisfied " + a + "; violated " + b);
}

void two_factor() {
    hhw::ModelParams2d p;
    p.S0 = 100;
    p.V0 = 0.1;
    p.r0 = 0.04;
    p.eta0 = 0.03;
    p.kappaV = 2;
    p.thetaV = 0.1;
    p.sigmaV = 0.3;
    p.kappaR = 1;
    p.sigmaR = 0.2;
    p.kappaEta = 1;
    p.sigmaEta = 0.2;
    p.rho1 = -0.5;
    p.rho2 = 0.0;
    p.rho3c = -0.5;
    p.curveR = hhw::YieldCurve::flat(0.04);
    p.curveEta = hhw::YieldCurve::flat(0.03);
    Check c;
    c.add(hhw::price_hhw2d(p, option(100, 1), 100, 100).price, 15.04, kTwoFactorTol);

    // Deterministic dividend: the two-factor pricer must collapse onto the one-factor one.
    hhw::ModelParams2d d = p;
    d.sigmaEta = 0;
    d.rho3c = 0;
    d.rho2 = 0.5;
    const double two = hhw::price_hhw2d(d, option(100, 1), 40, 40).price;
    const double one = hhw::price_hhw(base(0.5), option(100, 1), 40, 40).price;
    const bool reduces = std::abs(two - one) <= kReductionTol;
    report(8, "stochastic-dividend call, Nt=Ns=100, tol 0.10; reduction to 1e-6", c.ok && reduces,
           c.detail + fmt("; reduction gap %.2e", std::abs(two - one)));
}

void monte_carlo() {
    const double rho[3]{-0.5, 0.0, 0.5};
    const double ref[3]{11.34, 12.77, 14.04};
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const auto r = hhw::mc_price(base(rho[i]), option(100, 1), 200, 200000, 42);
        const bool covers = std::abs(r.estimate - ref[i]) <= r.halfWidth;
        const bool narrow = r.halfWidth <= kMaxHalfWidth;
        ok = ok && covers && narrow;
        if (!detail.empty()) detail += "; ";
        detail += fmt("%.4f", r.estimate) + fmt(" +- %.4f", r.halfWidth) + " vs " + fmt("%.2f", ref[i]);
    }
    report(9, "hybrid MC, Nt=200, 200000 paths: CI covers reference, half-width <= 0.12", ok, detail);
}

void properties() {
    std::vector<std::string> broken;

    // Constant preservation of one implicit step.
    {
        const hhw::SpaceGrid g(std::log(100.0), 100, 0.015);
        const std::vector<double> one(g.size(), 1.0);
        double err = 0;
        for (double mu : {-0.5, 0.0, 0.3})
            for (double v : {0.0, 0.1, 1.5})
                for (double x : hhw::pde_step(g, one, mu, v, 0.6, 0.02)) err = std::max(err, std::abs(x - 1));
        if (err > 1e-12) broken.push_back(fmt("constant preservation %.1e", err));
    }
    // One-step lattice mean matching.
    {
        double err = 0;
        const hhw::Lattice1D cir = hhw::build_cir_lattice(0.09, 1.0, 1.0, 0.09, 100, 0.05);
        const hhw::Lattice1D ou = hhw::build_ou_lattice(1.0, 100, 0.05);
        auto scan = [&](const hhw::Lattice1D& lat, const std::function<double(double)>& drift) {
            for (int n = 0; n < lat.steps(); ++n)
                for (int j = 0; j <= n; ++j) {
                    const double p = lat.prob_up(n, j);
                    if (!(p > 0 && p < 1)) continue;
                    const double m = p * lat.node(n + 1, lat.jump_up(n, j)) +
                                     (1 - p) * lat.node(n + 1, lat.jump_down(n, j));
                    const double t = lat.node(n, j) + drift(lat.node(n, j)) * lat.step();
                    err = std::max(err, std::abs(m - t) / std::max(1.0, std::abs(t)));
                }
        };
        scan(cir, [](double v) { return 1.0 * (0.09 - v); });
        scan(ou, [](double x) { return -x; });
        if (err > 1e-12) broken.push_back(fmt("lattice mean %.1e", err));
    }
    // Tridiagonal solve against dense elimination.
    {
        double err = 0;
        for (int M : {1, 10, 50}) {
            const int n = 2 * M + 1;
            const double a = 0.3, b = 2.0;
            std::vector<double> rhs(n);
            for (int i = 0; i < n; ++i) rhs[i] = std::cos(0.3 * i);
            const auto u = hhw::thomas_solve({a, b}, rhs);
            std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
            for (int i = 0; i < n; ++i) {
                A[i][i] = 1 + 2 * b;
                if (i == 0) A[0][1] = -2 * b;
                else if (i == n - 1) A[i][i - 1] = -2 * b;
                else {
                    A[i][i - 1] = -b + a;
                    A[i][i + 1] = -b - a;
                }
                A[i][n] = rhs[i];
            }
            for (int c = 0; c < n; ++c)
                for (int r = c + 1; r < n; ++r) {
                    const double f = A[r][c] / A[c][c];
                    for (int k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
                }
            std::vector<double> x(n);
            for (int r = n - 1; r >= 0; --r) {
                double s = A[r][n];
                for (int k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
                x[r] = s / A[r][r];
            }
            for (int i = 0; i < n; ++i) err = std::max(err, std::abs(u[i] - x[i]));
        }
        if (err > 1e-10) broken.push_back(fmt("tridiagonal vs dense %.1e", err));
    }
    // American dominates European at every grid point of the root.
    {
        const ModelParams p = base(0.5);
        const hhw::HybridPricer eu(p, hhw::make_contract(option(100, 1)), 40, 60);
        const hhw::HybridPricer am(p, hhw::make_contract(option(100, 1, true)), 40, 60);
        const auto e = eu.run(), a = am.run();
        for (int s = 0; s < eu.grid().size(); ++s)
            if (a.at(0, 0)[s] < e.at(0, 0)[s] - 1e-12) {
                broken.push_back("american below european");
                break;
            }
    }
    // Implied-vol round trip.
    {
        double err = 0;
        for (double vol : {0.05, 0.1, 0.32, 0.8, 1.5})
            err = std::max(err, std::abs(hhw::implied_vol(hhw::bs_call(100, 100, 1, 0.04, 0.03, vol),
                                                          100, 100, 1, 0.04, 0.03) - vol));
        if (err > 1e-8) broken.push_back(fmt("implied vol round trip %.1e", err));
    }
    // Monte Carlo bit-identical across worker counts.
    {
        const auto a = hhw::mc_price(base(0.5), option(100, 1), 50, 20000, 7, {1});
        const auto b = hhw::mc_price(base(0.5), option(100, 1), 50, 20000, 7, {4});
        const auto c = hhw::mc_price(base(0.5), option(100, 1), 50, 20000, 7, {16});
        if (a.estimate != b.estimate || a.estimate != c.estimate || a.halfWidth != b.halfWidth ||
            a.halfWidth != c.halfWidth)
            broken.push_back("monte carlo differs across worker counts");
    }
    std::string detail = "constant preservation, lattice mean, tridiagonal vs dense, american >= european, "
                         "implied-vol round trip, MC determinism";
    for (const auto& b : broken) detail += "; broken: " + b;
    report(10, "property suites", broken.empty(), detail);
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    european_and_vols();
    american();
    long_maturity();
    strong_skew();
    barrier();
    ratios();
    two_factor();
    monte_carlo();
    properties();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of 10 criteria failed (%.0f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
