#include "hhw/pricer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "hhw/analytics.hpp"
#include "hhw/errors.hpp"
#include "hhw/parallel.hpp"

namespace hhw {

Contract make_contract(const OptionSpec& spec) {
    spec.validate();
    Contract c;
    const double K = spec.strike;
    if (spec.payoff == PayoffKind::call)
        c.payoff = [K](double s) { return s > K ? s - K : 0.0; };
    else
        c.payoff = [K](double s) { return K > s ? K - s : 0.0; };
    c.maturity = spec.maturity;
    c.american = spec.exercise == ExerciseKind::american;
    c.upAndOut = spec.upAndOut;
    return c;
}

SpaceGrid make_grid(double S0, double half_width, int Ns) {
    if (Ns < 2 || Ns % 2 != 0) throw DomainError("Ns must be an even number >= 2");
    if (!(half_width > 0.0)) throw DomainError("grid half-width must be > 0");
    return SpaceGrid(std::log(S0), Ns / 2, 2.0 * half_width / Ns);
}

double default_half_width(double V0, double thetaV, double rate_gap, double T) {
    return 5.0 * std::sqrt(std::max(V0, thetaV) * T) + std::abs(rate_gap) * T;
}

std::vector<double> terminal_values(const SpaceGrid& grid, const Contract& contract) {
    std::vector<double> out(grid.size());
    for (int s = 0; s < grid.size(); ++s) out[s] = contract.payoff(std::exp(grid.y(s)));
    if (contract.upAndOut) {
        for (int s = barrier_index(grid, *contract.upAndOut); s < grid.size(); ++s) out[s] = 0.0;
    }
    return out;
}

std::vector<double> terminal_values(const SpaceGrid& grid, const OptionSpec& spec) {
    return terminal_values(grid, make_contract(spec));
}

// ----------------------------------------------------------------------------
// Quadratic shift interpolation
// ----------------------------------------------------------------------------

namespace {

inline double lagrange3(const double* f, double u) {
    // Nodes at -1, 0, +1 relative to f[0].
    return 0.5 * u * (u - 1.0) * f[-1] + (1.0 - u * u) * f[0] + 0.5 * u * (u + 1.0) * f[1];
}

inline double interpolate_at(std::span<const double> f, double pos) {
    const int last = static_cast<int>(f.size()) - 1;
    if (pos <= 0.0) return f[0];
    if (pos >= last) return f[last];
    int c = static_cast<int>(std::lround(pos));
    c = std::clamp(c, 1, last - 1);
    return lagrange3(f.data() + c, pos - c);
}

}  // namespace

void shift_interpolate_accumulate(std::span<const double> values, double dy, double shift,
                                  double weight, std::span<double> out, double cutoff) {
    const int full = static_cast<int>(values.size());
    const int last = full - 1;
    if (full < 3) throw DomainError("shift_interpolate: grid needs at least 3 points");

    const double t = shift / dy;
    const int size = cutoff - t >= full ? full
                                        : static_cast<int>(std::clamp(std::ceil(cutoff - t), 0.0,
                                                                      static_cast<double>(full)));
    const long m = std::lround(t);
    const double u = t - static_cast<double>(m);
    const double wm = weight * 0.5 * u * (u - 1.0);
    const double w0 = weight * (1.0 - u * u);
    const double wp = weight * 0.5 * u * (u + 1.0);

    // Indices whose stencil center s + m lies in [1, last-1] use the shared weights.
    const long lo = std::clamp<long>(1 - m, 0, size);
    const long hi = std::clamp<long>(last - 1 - m, -1, size - 1);
    for (long s = 0; s < std::min<long>(lo, size); ++s)
        out[s] += weight * interpolate_at(values, s + t);
    const double* f = values.data() + m;
    double* o = out.data();
    for (long s = lo; s <= hi; ++s) o[s] += wm * f[s - 1] + w0 * f[s] + wp * f[s + 1];
    for (long s = std::max(hi + 1, lo); s < size; ++s)
        out[s] += weight * interpolate_at(values, s + t);
}

std::vector<double> shift_interpolate(std::span<const double> values, const SpaceGrid& grid,
                                      double shift) {
    if (static_cast<int>(values.size()) != grid.size())
        throw DomainError("shift_interpolate: size does not match grid");
    std::vector<double> out(values.size(), 0.0);
    shift_interpolate_accumulate(values, grid.dy, shift, 1.0, out);
    return out;
}

// ----------------------------------------------------------------------------
// ValueSurface
// ----------------------------------------------------------------------------

ValueSurface::ValueSurface(int level, int factors, int grid_size)
    : level_(level), factors_(factors), grid_(grid_size) {
    if (factors != 1 && factors != 2) throw DomainError("ValueSurface supports 1 or 2 OU factors");
    data_.resize(node_count() * static_cast<std::size_t>(grid_));
}

std::size_t ValueSurface::node_count() const {
    const std::size_t w = static_cast<std::size_t>(level_) + 1;
    return factors_ == 2 ? w * w * w : w * w;
}

void ValueSurface::reshape(int level) {
    level_ = level;
    data_.resize(node_count() * static_cast<std::size_t>(grid_));
}

// ----------------------------------------------------------------------------
// HybridPricer
// ----------------------------------------------------------------------------

HybridPricer::HybridPricer(const ModelParams& model, Contract contract, int Nt, int Ns,
                           PricerOptions options)
    : factors_(1), m1_(model), contract_(std::move(contract)), options_(options) {
    model.validate();
    rhoPerp2_ = model.rho_perp2();
    shiftV_ = model.rho1 / model.sigmaV;
    shiftX_ = {model.rho2, 0.0};
    init(Nt, Ns, model.S0, model.V0, model.kappaV, model.thetaV, model.sigmaV,
         model.r0 - model.eta);
    lattices_.push_back(build_ou_lattice(model.kappaR, Nt, h_));
    for (int n = 0; n <= Nt; ++n)
        phiR_.push_back(phi_shift(model.curveR, model.kappaR, model.sigmaR, model.r0, n * h_));
    phiEta_.assign(static_cast<std::size_t>(Nt) + 1, model.eta);
}

HybridPricer::HybridPricer(const ModelParams2d& model, Contract contract, int Nt, int Ns,
                           PricerOptions options)
    : factors_(2), m2_(model), contract_(std::move(contract)), options_(options) {
    model.validate();
    rhoPerp2_ = model.rho_perp2();
    shiftV_ = model.rho1 / model.sigmaV;
    shiftX_ = {model.rho2, model.rho3c};
    init(Nt, Ns, model.S0, model.V0, model.kappaV, model.thetaV, model.sigmaV,
         model.r0 - model.eta0);
    lattices_.push_back(build_ou_lattice(model.kappaR, Nt, h_));
    lattices_.push_back(build_ou_lattice(model.kappaEta, Nt, h_));
    for (int n = 0; n <= Nt; ++n) {
        phiR_.push_back(phi_shift(model.curveR, model.kappaR, model.sigmaR, model.r0, n * h_));
        phiEta_.push_back(
            phi_shift(model.curveEta, model.kappaEta, model.sigmaEta, model.eta0, n * h_));
    }
}

void HybridPricer::init(int Nt, int Ns, double S0, double V0, double kappaV, double thetaV,
                        double sigmaV, double rate_gap) {
    if (Nt < 1) throw DomainError("Nt must be >= 1");
    if (!contract_.payoff) throw DomainError("contract has no payoff");
    if (!(contract_.maturity > 0.0)) throw DomainError("maturity must be > 0");
    if (contract_.american && contract_.upAndOut)
        throw UnsupportedError("barrier options are priced with european exercise only");
    Nt_ = Nt;
    h_ = contract_.maturity / Nt;
    const double L = options_.halfWidth
                         ? *options_.halfWidth
                         : default_half_width(V0, thetaV, rate_gap, contract_.maturity);
    grid_ = make_grid(S0, L, Ns);
    lattices_.reserve(3);
    lattices_.push_back(build_cir_lattice(V0, sigmaV, kappaV, thetaV, Nt, h_));

    intrinsic_.resize(grid_.size());
    for (int s = 0; s < grid_.size(); ++s) intrinsic_[s] = contract_.payoff(std::exp(grid_.y(s)));
    barrierIdx_ = contract_.upAndOut ? barrier_index(grid_, *contract_.upAndOut) : grid_.size();
    // Barrier position in storage-index units; shifted points at or past it
    // are knocked out.
    barrierPos_ = contract_.upAndOut
                      ? (std::log(*contract_.upAndOut) - grid_.y(0)) / grid_.dy
                      : std::numeric_limits<double>::infinity();
}

double HybridPricer::drift(int n, double v, double x1, double x2) const {
    if (factors_ == 1) return effective_drift_at(*m1_, v, x1, phiR_[n]);
    return effective_drift_2d_at(*m2_, v, x1, x2, phiR_[n], phiEta_[n]);
}

double HybridPricer::discount(int n, double x1) const {
    const double sigmaR = factors_ == 1 ? m1_->sigmaR : m2_->sigmaR;
    return std::exp(-(sigmaR * x1 + phiR_[n]) * h_);
}

double HybridPricer::dividend(int n, double x2) const {
    if (factors_ == 1) return phiEta_[n];
    return m2_->sigmaEta * x2 + phiEta_[n];
}

double HybridPricer::branch_shift(double v, double v_next, double x1, double x1_next, double x2,
                                  double x2_next) const {
    const double sv = std::sqrt(v);
    double s = shiftV_ * (v_next - v) + shiftX_[0] * sv * (x1_next - x1);
    if (factors_ == 2) s += shiftX_[1] * sv * (x2_next - x2);
    return s;
}

JointJumpProbs HybridPricer::branch_probabilities(int n, int k, int j, int l,
                                                  bool* clamped) const {
    const Lattice1D& V = variance_lattice();
    const Lattice1D& X = ou_lattice(0);
    const double pv = V.prob_up(n, k);
    const double px = X.prob_up(n, j);
    if (clamped) *clamped = false;
    if (factors_ == 2) return triple_joint_probabilities(pv, px, ou_lattice(1).prob_up(n, l));
    if (m1_->alphaVX == 0.0) return joint_probabilities(pv, px);

    const double v = V.node(n, k);
    const double x = X.node(n, j);
    const BranchIncrements inc{V.node(n + 1, V.jump_up(n, k)) - v,
                               V.node(n + 1, V.jump_down(n, k)) - v,
                               X.node(n + 1, X.jump_up(n, j)) - x,
                               X.node(n + 1, X.jump_down(n, j)) - x};
    const double cov = m1_->alphaVX * m1_->sigmaV * std::sqrt(v) * h_;
    const CorrelatedJoint cj = correlated_joint_probabilities(pv, px, inc, cov);
    if (clamped) *clamped = cj.clamped || cj.singular;
    return cj.probs;
}

ValueSurface HybridPricer::terminal_surface() const {
    ValueSurface s(Nt_, factors_, grid_.size());
    const std::vector<double> psi = terminal_values(grid_, contract_);
    const int w = Nt_ + 1;
    const int lmax = factors_ == 2 ? w : 1;
    for (int k = 0; k < w; ++k)
        for (int j = 0; j < w; ++j)
            for (int l = 0; l < lmax; ++l) std::copy(psi.begin(), psi.end(), s.at(k, j, l).begin());
    return s;
}

void HybridPricer::backward_step(const ValueSurface& next, int n, ValueSurface& out) const {
    if (next.level() != n + 1 || next.factors() != factors_ || next.grid_size() != grid_.size())
        throw DomainError("backward_step: surface does not match level n+1");
    if (out.factors() != factors_ || out.grid_size() != grid_.size())
        out = ValueSurface(n, factors_, grid_.size());
    else
        out.reshape(n);

    const Lattice1D& V = variance_lattice();
    const Lattice1D& X1 = ou_lattice(0);
    const Lattice1D* X2 = factors_ == 2 ? &ou_lattice(1) : nullptr;
    const int width = n + 1;
    const int lmax = factors_ == 2 ? width : 1;
    const int G = grid_.size();
    const bool dirichlet =
        contract_.upAndOut && options_.barrier == BarrierMode::dirichlet && barrierIdx_ < G;
    const std::optional<int> pin = dirichlet ? std::optional<int>(barrierIdx_) : std::nullopt;

    const bool bridge = dirichlet && (1.0 - rhoPerp2_) > 0.0;
    auto scratch = []() -> std::vector<double>& {
        thread_local std::vector<double> buf;
        return buf;
    };
    parallel_for(width, options_.threads, [&](int k) {
        const double v = V.node(n, k);
        const std::array<int, 2> kk{V.jump_up(n, k), V.jump_down(n, k)};
        for (int j = 0; j < width; ++j) {
            const double x1 = X1.node(n, j);
            const std::array<int, 2> jj{X1.jump_up(n, j), X1.jump_down(n, j)};
            for (int l = 0; l < lmax; ++l) {
                const double x2 = X2 ? X2->node(n, l) : 0.0;
                const std::array<int, 2> ll =
                    X2 ? std::array<int, 2>{X2->jump_up(n, l), X2->jump_down(n, l)}
                       : std::array<int, 2>{0, 0};
                bool clamped = false;
                const JointJumpProbs probs = branch_probabilities(n, k, j, l, &clamped);
                if (clamped) ++clamped_;

                std::span<double> acc = out.at(k, j, l);
                std::fill(acc.begin(), acc.end(), 0.0);
                double growth = 0.0;  // sum_b p_b exp(shift_b)
                for (int b = 0; b < probs.branches; ++b) {
                    const double p = probs[b];
                    if (p == 0.0) continue;
                    int ka, jb, lc;
                    if (factors_ == 1) {
                        ka = kk[(b >> 1) & 1];
                        jb = jj[b & 1];
                        lc = 0;
                    } else {
                        ka = kk[(b >> 2) & 1];
                        jb = jj[(b >> 1) & 1];
                        lc = ll[b & 1];
                    }
                    const double shift =
                        branch_shift(v, V.node(n + 1, ka), x1, X1.node(n + 1, jb), x2,
                                     X2 ? X2->node(n + 1, lc) : 0.0);
                    growth += p * std::exp(shift);
                    if (bridge) {
                        // Continuous monitoring of the tree-driven part of the
                        // move: weight by the Brownian-bridge survival
                        // probability between y and y + shift.
                        std::vector<double>& tmp = scratch();
                        tmp.assign(static_cast<std::size_t>(G), 0.0);
                        shift_interpolate_accumulate(next.at(ka, jb, lc), grid_.dy, shift, p, tmp,
                                                     barrierPos_);
                        const double var = (1.0 - rhoPerp2_) * v * h_;
                        const double reach = 5.0 * std::sqrt(var) + std::max(shift, 0.0);
                        const int from = std::max(
                            0, static_cast<int>(std::floor(barrierPos_ - reach / grid_.dy)));
                        for (int s = from; s < G && var > 0.0; ++s) {
                            const double d0 = (barrierPos_ - s) * grid_.dy;
                            const double d1 = d0 - shift;
                            if (d0 > 0.0 && d1 > 0.0) tmp[s] *= -std::expm1(-2.0 * d0 * d1 / var);
                        }
                        for (int s = 0; s < G; ++s) acc[s] += tmp[s];
                    } else {
                        shift_interpolate_accumulate(next.at(ka, jb, lc), grid_.dy, shift, p, acc,
                                                     barrierPos_);
                    }
                }

                const double disc = discount(n, x1);
                TridiagCoeffs coeffs = assemble(drift(n, v, x1, x2), v, rhoPerp2_, h_, grid_.dy);
                if (options_.martingaleDrift) {
                    // On exp(y) the interior operator scales by
                    // a = 1 - 2 alpha sinh(dy) - 2 beta (cosh(dy) - 1); pick alpha so
                    // that disc * growth / a = exp(-q h).
                    const double a = disc * growth * std::exp(dividend(n, x2) * h_);
                    coeffs.alpha = (1.0 - a + 2.0 * coeffs.beta * (1.0 - std::cosh(grid_.dy))) /
                                   (2.0 * std::sinh(grid_.dy));
                }
                try {
                    thomas_solve(coeffs, acc, acc, pin);
                } catch (const SolverError& e) {
                    std::ostringstream msg;
                    msg << e.what() << " at node (n=" << n << ", k=" << k << ", j=" << j;
                    if (X2) msg << ", l=" << l;
                    msg << ", v=" << v << ", x=" << x1 << ")";
                    throw SolverError(msg.str());
                }

                for (int s = 0; s < G; ++s) acc[s] *= disc;
                if (contract_.american) {
                    for (int s = 0; s < G; ++s) acc[s] = std::max(acc[s], intrinsic_[s]);
                }
                for (int s = barrierIdx_; s < G; ++s) acc[s] = 0.0;
            }
        }
    });
}

ValueSurface HybridPricer::backward_step(const ValueSurface& next, int n) const {
    ValueSurface out(n, factors_, grid_.size());
    backward_step(next, n, out);
    return out;
}

ValueSurface HybridPricer::run() const {
    ValueSurface cur = terminal_surface();
    ValueSurface other(Nt_ - 1, factors_, grid_.size());
    for (int n = Nt_ - 1; n >= 0; --n) {
        backward_step(cur, n, other);
        std::swap(cur, other);
    }
    return cur;
}

double HybridPricer::root_value(const ValueSurface& level0) const {
    if (level0.level() != 0) throw DomainError("root_value expects the level-0 surface");
    return level0.at(0, 0, 0)[grid_.M];
}

// ----------------------------------------------------------------------------
// Drivers
// ----------------------------------------------------------------------------

namespace {

template <class Model>
PriceResult price_impl(const Model& model, const OptionSpec& spec, int Nt, int Ns,
                       const PricerOptions& options, double q) {
    const auto start = std::chrono::steady_clock::now();
    HybridPricer pricer(model, make_contract(spec), Nt, Ns, options);
    const ValueSurface root = pricer.run();
    PriceResult out;
    out.price = pricer.root_value(root);
    out.Nt = Nt;
    out.Ns = Ns;
    out.clampedNodes = pricer.clamped_nodes();
    if (spec.payoff == PayoffKind::call && spec.exercise == ExerciseKind::european &&
        !spec.upAndOut) {
        const double T = spec.maturity;
        out.impliedVol = try_implied_vol(out.price, model.S0, spec.strike, T,
                                         model.curveR.zero_rate(T), q);
    }
    out.wallTime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

PriceResult price_hhw(const ModelParams& model, const OptionSpec& spec, int Nt, int Ns,
                      const PricerOptions& options) {
    return price_impl(model, spec, Nt, Ns, options, model.eta);
}

PriceResult price_hhw2d(const ModelParams2d& model, const OptionSpec& spec, int Nt, int Ns,
                        const PricerOptions& options) {
    return price_impl(model, spec, Nt, Ns, options, model.curveEta.zero_rate(spec.maturity));
}

}  // namespace hhw
