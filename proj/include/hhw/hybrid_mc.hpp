#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hhw/lattice.hpp"
#include "hhw/model.hpp"
#include "hhw/pricer.hpp"

namespace hhw {

// ============================================================================
// Random source
// ============================================================================

/// Counter-based generator: output i is a SplitMix64 finalizer applied to
/// key + i * golden-gamma. A path's key is derived from mix(seed) ^ pathIndex,
/// so every path owns an independent, position-addressable stream. Mixing the
/// seed first keeps nearby seeds (42, 43) from reusing each other's paths.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform();
    /// Uniform on (0, 1), safe for the inverse normal CDF.
    double uniform_open();
    /// Standard normal via the inverse CDF of uniform_open().
    double gaussian();

    [[nodiscard]] std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Inverse of the standard normal CDF (Wichura's AS241, ~1e-16 relative).
[[nodiscard]] double inverse_normal_cdf(double p);

/// Sum with fixed pairwise association, independent of how the values were
/// produced.
[[nodiscard]] double pairwise_sum(std::span<const double> values);

// ============================================================================
// Simulation
// ============================================================================

struct PathState {
    int n = 0;
    int k = 0;  // variance node
    int j = 0;  // rate node
    int l = 0;  // dividend node (HHW2d)
    double y = 0.0;
};

struct PathOutcome {
    double yT = 0.0;
    double vT = 0.0;
    double rateIntegral = 0.0;  // h * sum_{n<N} r_{nh}
    bool knockedOut = false;
};

struct MCResult {
    double estimate = 0.0;
    double halfWidth = 0.0;  // 1.96 standard errors
    double stdError = 0.0;
    std::int64_t paths = 0;
    std::uint64_t seed = 0;
    double wallTime = 0.0;
};

struct McOptions {
    int threads = 0;  // 0: hardware concurrency
};

/// Index of the branch selected by `uniform`, partitioning [0,1) in branch
/// order (uu, ud, du, dd, or lexicographic over {u,d}^3).
[[nodiscard]] int select_branch(const JointJumpProbs& probs, double uniform);

/// Log-price Euler step given the tree move of (V, X).
[[nodiscard]] double euler_y_step(const ModelParams& p, double y, double v_n, double x_n,
                                  double v_next, double x_next, double t_n, double h,
                                  double gaussian);
[[nodiscard]] double euler_y_step(const ModelParams2d& p, double y, double v_n, double x1_n,
                                  double x2_n, double v_next, double x1_next, double x2_next,
                                  double t_n, double h, double gaussian);

/// Hybrid simulator: (V, X[, X^eta]) run on the binomial lattices, the
/// log-price follows the frozen-coefficient Euler scheme. Random numbers per
/// step are consumed as: one uniform for the joint branch, then one uniform
/// mapped to a Gaussian.
class HybridSimulator {
public:
    HybridSimulator(const ModelParams& model, int Nt, double T);
    HybridSimulator(const ModelParams2d& model, int Nt, double T);

    [[nodiscard]] int steps() const { return pricer_.steps(); }
    [[nodiscard]] double step() const { return pricer_.step(); }
    [[nodiscard]] const HybridPricer& tree() const { return pricer_; }
    [[nodiscard]] double log_spot() const { return y0_; }

    [[nodiscard]] PathState initial_state() const;
    /// Advances the lattice indices by one step; y and n are updated by the
    /// caller through advance().
    [[nodiscard]] PathState chain_step(const PathState& state, double uniform) const;
    /// Full step: tree move from `uniform`, Euler update from `gaussian`.
    [[nodiscard]] PathState advance(const PathState& state, double uniform,
                                    double gaussian) const;

    [[nodiscard]] PathOutcome simulate_path(std::uint64_t seed, std::uint64_t path,
                                            std::optional<double> upAndOut = std::nullopt) const;

private:
    int factors_;
    double y0_;
    double sigmaR_;
    HybridPricer pricer_;
};

/// E[exp(-h sum r) payoff(S_T)] over `paths` trajectories; european only.
[[nodiscard]] MCResult mc_expectation(const HybridSimulator& sim, const Contract& contract,
                                      std::int64_t paths, std::uint64_t seed,
                                      const McOptions& options = {});

[[nodiscard]] MCResult mc_price(const ModelParams& model, const OptionSpec& spec, int Nt,
                                std::int64_t paths, std::uint64_t seed,
                                const McOptions& options = {});
[[nodiscard]] MCResult mc_price2d(const ModelParams2d& model, const OptionSpec& spec, int Nt,
                                  std::int64_t paths, std::uint64_t seed,
                                  const McOptions& options = {});

}  // namespace hhw
