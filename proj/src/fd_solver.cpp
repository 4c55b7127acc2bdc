#include "hhw/fd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hhw/errors.hpp"

namespace hhw {

SpaceGrid::SpaceGrid(double center, int half_count, double step)
    : Y0(center), M(half_count), dy(step) {
    if (half_count < 1) throw DomainError("space grid needs M >= 1");
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("space grid needs dy > 0");
}

std::vector<double> SpaceGrid::points() const {
    std::vector<double> ys(size());
    for (int s = 0; s < size(); ++s) ys[s] = y(s);
    return ys;
}

TridiagCoeffs assemble(double mu_eff, double v, double rho_perp2, double h, double dy) {
    return {h * mu_eff / (2.0 * dy), h * rho_perp2 * v / (2.0 * dy * dy)};
}

void thomas_solve(const TridiagCoeffs& c, std::span<const double> rhs, std::span<double> out,
                  std::optional<int> dirichlet_top) {
    const int n = static_cast<int>(rhs.size());
    if (n < 2 || out.size() != rhs.size()) throw DomainError("thomas_solve: bad sizes");

    const double a = c.alpha;
    const double b = c.beta;
    const double diag = 1.0 + 2.0 * b;
    const double lower = -b + a;
    const double upper = -b - a;

    // Active rows are [0, last]; a Dirichlet row pins u_last = 0.
    int last = n - 1;
    bool pinned = false;
    if (dirichlet_top && *dirichlet_top < n) {
        last = std::max(*dirichlet_top, 0);
        pinned = true;
    }
    for (int i = last + 1; i < n; ++i) out[i] = 0.0;
    if (pinned && last == 0) {
        out[0] = 0.0;
        return;
    }

    // `out` holds the modified rhs; the modified upper diagonal lives in a
    // thread-local scratch buffer so repeated solves do not allocate.
    thread_local std::vector<double> cprime;
    cprime.resize(static_cast<std::size_t>(n));

    auto fail = [&](int row) {
        std::ostringstream msg;
        msg << "zero pivot in tridiagonal elimination at row " << row << " (alpha=" << a
            << ", beta=" << b << ")";
        throw SolverError(msg.str());
    };

    double pivot = diag;
    if (pivot == 0.0) fail(0);
    cprime[0] = -2.0 * b / pivot;
    out[0] = rhs[0] / pivot;
    for (int i = 1; i <= last; ++i) {
        double sub = lower;
        double sup = upper;
        double r = rhs[i];
        if (i == n - 1) {
            sub = -2.0 * b;
            sup = 0.0;
        }
        if (pinned && i == last) {
            sub = 0.0;
            sup = 0.0;
            r = 0.0;
            pivot = 1.0;
        } else {
            pivot = diag - sub * cprime[i - 1];
            if (pivot == 0.0 || !std::isfinite(pivot)) fail(i);
        }
        cprime[i] = sup / pivot;
        out[i] = (r - sub * out[i - 1]) / pivot;
    }
    for (int i = last - 1; i >= 0; --i) out[i] -= cprime[i] * out[i + 1];
}

std::vector<double> thomas_solve(const TridiagCoeffs& c, std::span<const double> rhs) {
    std::vector<double> out(rhs.size());
    thomas_solve(c, rhs, out);
    return out;
}

std::vector<double> pde_step(const SpaceGrid& grid, std::span<const double> terminal,
                             double mu_eff, double v, double rho_perp2, double h) {
    if (static_cast<int>(terminal.size()) != grid.size())
        throw DomainError("pde_step: terminal size does not match grid");
    return thomas_solve(assemble(mu_eff, v, rho_perp2, h, grid.dy), terminal);
}

int barrier_index(const SpaceGrid& grid, double barrier) {
    // A node within round-off of ln(H) counts as on the barrier.
    const double lb = std::log(barrier) - 1e-9 * grid.dy;
    const double guess = std::ceil((lb - grid.Y0) / grid.dy) + grid.M;
    int s = static_cast<int>(std::clamp(guess, 0.0, static_cast<double>(grid.size())));
    while (s > 0 && grid.y(s - 1) >= lb) --s;
    while (s < grid.size() && grid.y(s) < lb) ++s;
    return s;
}

}  // namespace hhw
