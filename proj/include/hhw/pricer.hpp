#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hhw/fd_solver.hpp"
#include "hhw/lattice.hpp"
#include "hhw/model.hpp"

namespace hhw {

/// Payoff on the share price plus exercise style. OptionSpec converts to this;
/// tests use it directly for synthetic payoffs such as Psi = 1.
struct Contract {
    std::function<double(double)> payoff;
    double maturity = 1.0;
    bool american = false;
    std::optional<double> upAndOut;
};

[[nodiscard]] Contract make_contract(const OptionSpec& spec);

/// Both modes knock out tree moves that land at or above ln H.
enum class BarrierMode {
    /// Monitoring at the step dates: solve on the full grid, zero y >= ln H
    /// after each step.
    projection,
    /// Continuous monitoring: u = 0 at the first grid point >= ln H inside the
    /// solve, and tree moves weighted by their Brownian-bridge survival
    /// probability.
    dirichlet,
};

struct PricerOptions {
    int threads = 0;  // 0: hardware concurrency
    BarrierMode barrier = BarrierMode::projection;
    /// Overrides the grid half-width 5 sqrt(max(V0, thetaV) T) + |r0 - q| T.
    std::optional<double> halfWidth;
    /// Convection in the implicit step chosen so that one discrete step (tree
    /// move, solve, discount) reproduces the forward of S exactly. This removes
    /// the first-order time bias between the explicit discount and the
    /// implicit growth, which dominates at long maturities. When false the
    /// continuous drift mu(v, x, t) is used as is.
    bool martingaleDrift = true;
};

struct PriceResult {
    double price = 0.0;
    std::optional<double> impliedVol;
    int Nt = 0;
    int Ns = 0;
    double wallTime = 0.0;
    std::size_t clampedNodes = 0;  // correlated-tree nodes repaired by clamping
};

/// Grid centered on ln S0 with Ns+1 points covering [-L, L] around it.
[[nodiscard]] SpaceGrid make_grid(double S0, double half_width, int Ns);
[[nodiscard]] double default_half_width(double V0, double thetaV, double rate_gap, double T);

/// Psi(y_i) on the grid; zero at and above an up-and-out barrier.
[[nodiscard]] std::vector<double> terminal_values(const SpaceGrid& grid, const OptionSpec& spec);
[[nodiscard]] std::vector<double> terminal_values(const SpaceGrid& grid, const Contract& contract);

/// w_l = f(y_l + shift), f the Lagrange quadratic through the three grid values
/// nearest to y_l + shift; clamped to the end values outside the grid.
[[nodiscard]] std::vector<double> shift_interpolate(std::span<const double> values,
                                                    const SpaceGrid& grid, double shift);

/// out += weight * shift_interpolate(values, shift). Points whose shifted
/// position (in index units) reaches `cutoff` receive nothing.
void shift_interpolate_accumulate(std::span<const double> values, double dy, double shift,
                                  double weight, std::span<double> out,
                                  double cutoff = std::numeric_limits<double>::infinity());

// ============================================================================
// Backward induction state
// ============================================================================

/// Option values at one time level, indexed by (variance node k, rate node j
/// [, dividend node l], grid point i). Level n has (n+1)^(1+factors) nodes.
class ValueSurface {
public:
    ValueSurface() = default;
    ValueSurface(int level, int factors, int grid_size);

    /// Re-shapes in place, keeping the allocation when it is large enough.
    void reshape(int level);

    [[nodiscard]] int level() const { return level_; }
    [[nodiscard]] int factors() const { return factors_; }
    [[nodiscard]] int grid_size() const { return grid_; }
    [[nodiscard]] std::size_t node_count() const;

    [[nodiscard]] std::size_t node_index(int k, int j, int l = 0) const {
        const std::size_t w = static_cast<std::size_t>(level_) + 1;
        std::size_t idx = static_cast<std::size_t>(k) * w + static_cast<std::size_t>(j);
        if (factors_ == 2) idx = idx * w + static_cast<std::size_t>(l);
        return idx;
    }
    [[nodiscard]] std::span<double> at(int k, int j, int l = 0) {
        return {data_.data() + node_index(k, j, l) * grid_, static_cast<std::size_t>(grid_)};
    }
    [[nodiscard]] std::span<const double> at(int k, int j, int l = 0) const {
        return {data_.data() + node_index(k, j, l) * grid_, static_cast<std::size_t>(grid_)};
    }

private:
    int level_ = 0;
    int factors_ = 1;
    int grid_ = 0;
    std::vector<double> data_;
};

/// Hybrid tree / finite-difference backward induction. The variance and the
/// one (HHW) or two (HHW2d) OU factors live on binomial lattices; the
/// log-price is handled by an implicit finite-difference step per lattice node.
class HybridPricer {
public:
    HybridPricer(const ModelParams& model, Contract contract, int Nt, int Ns,
                 PricerOptions options = {});
    HybridPricer(const ModelParams2d& model, Contract contract, int Nt, int Ns,
                 PricerOptions options = {});

    [[nodiscard]] int factors() const { return factors_; }
    [[nodiscard]] int steps() const { return Nt_; }
    [[nodiscard]] double step() const { return h_; }
    [[nodiscard]] const SpaceGrid& grid() const { return grid_; }
    [[nodiscard]] const Lattice1D& variance_lattice() const { return lattices_.front(); }
    /// factor 0: short-rate OU factor; factor 1: dividend OU factor (HHW2d).
    [[nodiscard]] const Lattice1D& ou_lattice(int factor) const { return lattices_[1 + factor]; }
    [[nodiscard]] double rho_perp2() const { return rhoPerp2_; }
    [[nodiscard]] double phi_r(int n) const { return phiR_[n]; }
    [[nodiscard]] double phi_eta(int n) const { return phiEta_[n]; }

    /// mu(v, x1[, x2], nh) of the frozen-coefficient log-price SDE.
    [[nodiscard]] double drift(int n, double v, double x1, double x2 = 0.0) const;
    /// Per-step discount exp(-(sigmaR x1 + phi_r(nh)) h).
    [[nodiscard]] double discount(int n, double x1) const;
    /// Dividend yield at (n, x2); constant for the one-factor-dividend model.
    [[nodiscard]] double dividend(int n, double x2) const;
    /// Log-price shift applied to a successor surface.
    [[nodiscard]] double branch_shift(double v, double v_next, double x1, double x1_next,
                                      double x2 = 0.0, double x2_next = 0.0) const;
    /// Branch probabilities at node (n, k, j[, l]).
    [[nodiscard]] JointJumpProbs branch_probabilities(int n, int k, int j, int l = 0,
                                                      bool* clamped = nullptr) const;

    [[nodiscard]] ValueSurface terminal_surface() const;
    /// One step of the induction: surface at level n from the one at n+1.
    void backward_step(const ValueSurface& next, int n, ValueSurface& out) const;
    [[nodiscard]] ValueSurface backward_step(const ValueSurface& next, int n) const;
    /// Full induction down to level 0.
    [[nodiscard]] ValueSurface run() const;
    /// Value at (V0, X0 = 0, Y0), i.e. grid storage index M of the root node.
    [[nodiscard]] double root_value(const ValueSurface& level0) const;

    [[nodiscard]] std::size_t clamped_nodes() const { return clamped_.load(); }

private:
    void init(int Nt, int Ns, double S0, double V0, double kappaV, double thetaV,
              double sigmaV, double rate_gap);

    int factors_ = 1;
    std::optional<ModelParams> m1_;
    std::optional<ModelParams2d> m2_;
    Contract contract_;
    PricerOptions options_;
    int Nt_ = 0;
    double h_ = 0.0;
    SpaceGrid grid_{0.0, 1, 1.0};
    std::vector<Lattice1D> lattices_;  // variance, then OU factors
    std::vector<double> phiR_;
    std::vector<double> phiEta_;
    std::vector<double> intrinsic_;
    int barrierIdx_ = 0;
    double barrierPos_ = std::numeric_limits<double>::infinity();
    double rhoPerp2_ = 1.0;
    double shiftV_ = 0.0;             // rho1 / sigmaV
    std::array<double, 2> shiftX_{};  // rho2, rho3c
    mutable std::atomic<std::size_t> clamped_{0};
};

[[nodiscard]] PriceResult price_hhw(const ModelParams& model, const OptionSpec& spec, int Nt,
                                    int Ns, const PricerOptions& options = {});
[[nodiscard]] PriceResult price_hhw2d(const ModelParams2d& model, const OptionSpec& spec,
                                      int Nt, int Ns, const PricerOptions& options = {});

}  // namespace hhw
