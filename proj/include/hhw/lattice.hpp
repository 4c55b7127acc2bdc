#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hhw {

/// Recombining binomial lattice with multiple jumps.
///
/// Level n (0..N) holds n+1 node values, nondecreasing in the index. For each
/// node below the last level the lattice caches the up/down successor indices
/// at level n+1 and the up-probability that matches the one-step conditional
/// mean of the diffusion (clamped to [0,1]). Immutable after construction.
class Lattice1D {
public:
    using Drift = std::function<double(double)>;

    /// `nodes` is the level-major concatenation of all levels, (N+1)(N+2)/2
    /// values. Transitions are derived from `drift`, evaluated at node values.
    Lattice1D(int steps, double h, std::vector<double> nodes, const Drift& drift);

    [[nodiscard]] int steps() const { return steps_; }
    [[nodiscard]] double step() const { return h_; }
    [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }

    [[nodiscard]] std::span<const double> level(int n) const {
        return {nodes_.data() + offset(n), static_cast<std::size_t>(n) + 1};
    }
    [[nodiscard]] double node(int n, int j) const { return nodes_[offset(n) + j]; }
    [[nodiscard]] int jump_up(int n, int j) const { return up_[offset(n) + j]; }
    [[nodiscard]] int jump_down(int n, int j) const { return down_[offset(n) + j]; }
    [[nodiscard]] double prob_up(int n, int j) const { return prob_[offset(n) + j]; }
    /// Number of nodes whose up/down successors have equal values.
    [[nodiscard]] std::size_t degenerate_nodes() const { return degenerate_; }

    static std::size_t offset(int n) {
        return static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2;
    }

private:
    int steps_;
    double h_;
    std::vector<double> nodes_;
    std::vector<int> up_;
    std::vector<int> down_;
    std::vector<double> prob_;
    std::size_t degenerate_ = 0;
};

struct JumpPair {
    int up;
    int down;
};

/// OU lattice x_{n,j} = (2j - n) sqrt(h) with drift -kappa x.
[[nodiscard]] Lattice1D build_ou_lattice(double kappa, int N, double h);

/// CIR lattice v_{n,k} = (sqrt(V0) + sigmaV/2 (2k - n) sqrt(h))^2, floored at 0
/// when the bracket is nonpositive. Jumps and probabilities use the drift of
/// V itself, kappaV (thetaV - v).
[[nodiscard]] Lattice1D build_cir_lattice(double V0, double sigmaV, double kappaV,
                                          double thetaV, int N, double h);

/// Successor indices of node (n, j) at level n+1 for a local drift:
/// up = min{j* in [j+1, n+1] : x + drift h <= x_{n+1,j*}}, else n+1;
/// down = max{j* in [0, j] : x + drift h >= x_{n+1,j*}}, else 0.
[[nodiscard]] JumpPair multiple_jump_indices(const Lattice1D& lat, int n, int j, double drift);

/// Up-probability matching the local mean node + drift h, clamped to [0,1].
/// When the two successors coincide in value, returns 1 for drift >= 0 and 0
/// otherwise.
[[nodiscard]] double up_probability(const Lattice1D& lat, int n, int j, double drift);

// ============================================================================
// Joint transitions
// ============================================================================

/// Branch probabilities of a product tree. With two factors the order is
/// uu, ud, du, dd (first letter: variance). With three factors the order is
/// lexicographic over {u,d}^3: uuu, uud, udu, udd, duu, dud, ddu, ddd.
struct JointJumpProbs {
    std::array<double, 8> p{};
    int branches = 4;

    [[nodiscard]] double operator[](std::size_t i) const { return p[i]; }
    [[nodiscard]] double sum() const;
};

[[nodiscard]] JointJumpProbs joint_probabilities(double pV_up, double pX_up);

[[nodiscard]] JointJumpProbs triple_joint_probabilities(double pV_up, double pXr_up,
                                                        double pXeta_up);

/// Increments of the two factors along their up/down branches.
struct BranchIncrements {
    double dv_up;
    double dv_down;
    double dx_up;
    double dx_down;
};

struct CorrelatedJoint {
    JointJumpProbs probs;
    bool clamped = false;   // a negative branch was set to 0 and the rest renormalized
    bool singular = false;  // covariance row degenerate; product probabilities returned
};

/// Branch probabilities that keep the two marginals and match the local
/// covariance `local_cov` (alpha sigmaV sqrt(v) h) of the increments.
///
/// The marginal and normalization rows fix the solution up to one free
/// parameter along (1, -1, -1, 1); the covariance row then determines it.
/// The covariance is measured around the tree's own conditional means, so
/// local_cov = 0 reproduces joint_probabilities exactly.
[[nodiscard]] CorrelatedJoint correlated_joint_probabilities(double pV_up, double pX_up,
                                                             const BranchIncrements& inc,
                                                             double local_cov);

}  // namespace hhw
