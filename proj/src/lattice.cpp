#include "hhw/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "hhw/errors.hpp"

namespace hhw {

Lattice1D::Lattice1D(int steps, double h, std::vector<double> nodes, const Drift& drift)
    : steps_(steps), h_(h), nodes_(std::move(nodes)) {
    if (steps < 1 || !(h > 0.0)) throw DomainError("lattice needs N >= 1 and h > 0");
    if (nodes_.size() != offset(steps + 1)) throw DomainError("lattice node count mismatch");

    const std::size_t inner = offset(steps);
    up_.resize(inner);
    down_.resize(inner);
    prob_.resize(inner);
    for (int n = 0; n < steps; ++n) {
        for (int j = 0; j <= n; ++j) {
            const double mu = drift(node(n, j));
            const JumpPair jp = multiple_jump_indices(*this, n, j, mu);
            const std::size_t at = offset(n) + j;
            up_[at] = jp.up;
            down_[at] = jp.down;
            prob_[at] = up_probability(*this, n, j, mu);
            if (node(n + 1, jp.up) == node(n + 1, jp.down)) ++degenerate_;
        }
    }
}

JumpPair multiple_jump_indices(const Lattice1D& lat, int n, int j, double drift) {
    const double mean = lat.node(n, j) + drift * lat.step();
    const auto next = lat.level(n + 1);

    // Levels are sorted, so the two scans reduce to binary searches.
    const auto up_it = std::lower_bound(next.begin() + j + 1, next.end(), mean);
    const int up = up_it == next.end() ? n + 1 : static_cast<int>(up_it - next.begin());

    const auto down_end = next.begin() + j + 1;
    const auto down_it = std::upper_bound(next.begin(), down_end, mean);
    const int down = down_it == next.begin() ? 0 : static_cast<int>(down_it - next.begin()) - 1;
    return {up, down};
}

double up_probability(const Lattice1D& lat, int n, int j, double drift) {
    const JumpPair jp = multiple_jump_indices(lat, n, j, drift);
    const double hi = lat.node(n + 1, jp.up);
    const double lo = lat.node(n + 1, jp.down);
    const double span = hi - lo;
    if (!(span > 0.0)) return drift >= 0.0 ? 1.0 : 0.0;
    const double p = (drift * lat.step() + lat.node(n, j) - lo) / span;
    return std::clamp(p, 0.0, 1.0);
}

Lattice1D build_ou_lattice(double kappa, int N, double h) {
    if (N < 1 || !(h > 0.0)) throw DomainError("OU lattice needs N >= 1 and h > 0");
    const double sh = std::sqrt(h);
    std::vector<double> nodes(Lattice1D::offset(N + 1));
    for (int n = 0; n <= N; ++n)
        for (int j = 0; j <= n; ++j) nodes[Lattice1D::offset(n) + j] = (2 * j - n) * sh;
    return Lattice1D(N, h, std::move(nodes), [kappa](double x) { return -kappa * x; });
}

Lattice1D build_cir_lattice(double V0, double sigmaV, double kappaV, double thetaV, int N,
                            double h) {
    if (!(V0 > 0.0) || !(sigmaV > 0.0)) throw DomainError("CIR lattice needs V0 > 0 and sigmaV > 0");
    if (N < 1 || !(h > 0.0)) throw DomainError("CIR lattice needs N >= 1 and h > 0");
    const double root = std::sqrt(V0);
    const double half = 0.5 * sigmaV * std::sqrt(h);
    std::vector<double> nodes(Lattice1D::offset(N + 1));
    for (int n = 0; n <= N; ++n) {
        for (int k = 0; k <= n; ++k) {
            const double s = root + half * (2 * k - n);
            nodes[Lattice1D::offset(n) + k] = s > 0.0 ? s * s : 0.0;
        }
    }
    return Lattice1D(N, h, std::move(nodes),
                     [kappaV, thetaV](double v) { return kappaV * (thetaV - v); });
}

// ----------------------------------------------------------------------------
// Joint transitions
// ----------------------------------------------------------------------------

double JointJumpProbs::sum() const {
    double s = 0.0;
    for (int i = 0; i < branches; ++i) s += p[i];
    return s;
}

JointJumpProbs joint_probabilities(double pV_up, double pX_up) {
    JointJumpProbs out;
    out.branches = 4;
    const double pV_dn = 1.0 - pV_up;
    const double pX_dn = 1.0 - pX_up;
    out.p[0] = pV_up * pX_up;
    out.p[1] = pV_up * pX_dn;
    out.p[2] = pV_dn * pX_up;
    out.p[3] = pV_dn * pX_dn;
    return out;
}

JointJumpProbs triple_joint_probabilities(double pV_up, double pXr_up, double pXeta_up) {
    JointJumpProbs out;
    out.branches = 8;
    const std::array<double, 2> a{pV_up, 1.0 - pV_up};
    const std::array<double, 2> b{pXr_up, 1.0 - pXr_up};
    const std::array<double, 2> c{pXeta_up, 1.0 - pXeta_up};
    for (int i = 0; i < 8; ++i) out.p[i] = a[(i >> 2) & 1] * b[(i >> 1) & 1] * c[i & 1];
    return out;
}

CorrelatedJoint correlated_joint_probabilities(double pV_up, double pX_up,
                                               const BranchIncrements& inc, double local_cov) {
    CorrelatedJoint out;
    out.probs = joint_probabilities(pV_up, pX_up);

    // Coefficient of the free direction (1,-1,-1,1) in the covariance row.
    const double denom = (inc.dv_up - inc.dv_down) * (inc.dx_up - inc.dx_down);
    if (!(std::abs(denom) > 0.0) || !std::isfinite(denom)) {
        out.singular = local_cov != 0.0;
        return out;
    }
    const double delta = local_cov / denom;
    auto& p = out.probs.p;
    p[0] += delta;
    p[1] -= delta;
    p[2] -= delta;
    p[3] += delta;

    if (std::any_of(p.begin(), p.begin() + 4, [](double q) { return q < 0.0; })) {
        out.clamped = true;
        double s = 0.0;
        for (int i = 0; i < 4; ++i) {
            p[i] = std::max(p[i], 0.0);
            s += p[i];
        }
        for (int i = 0; i < 4; ++i) p[i] /= s;
    }
    return out;
}

}  // namespace hhw
