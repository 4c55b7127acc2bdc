#pragma once

#include <optional>
#include <span>
#include <vector>

namespace hhw {

/// Uniform log-price grid y_i = Y0 + i dy, i = -M..M. Storage index is i + M.
struct SpaceGrid {
    double Y0 = 0.0;
    int M = 1;
    double dy = 1.0;

    SpaceGrid(double center, int half_count, double step);

    [[nodiscard]] int size() const { return 2 * M + 1; }
    /// Point at storage index s (0..2M).
    [[nodiscard]] double y(int s) const { return Y0 + (s - M) * dy; }
    [[nodiscard]] std::vector<double> points() const;
};

/// Convection and diffusion numbers of the implicit step.
struct TridiagCoeffs {
    double alpha = 0.0;
    double beta = 0.0;
};

/// alpha = h mu / (2 dy), beta = h rhoPerp2 v / (2 dy^2).
[[nodiscard]] TridiagCoeffs assemble(double mu_eff, double v, double rho_perp2, double h,
                                     double dy);

/// Solves A u = rhs for the Neumann-closed implicit matrix
///   row 0       : [1+2b, -2b]
///   interior    : [-b+a, 1+2b, -b-a]
///   row 2M      : [-2b, 1+2b]
/// by forward elimination and back substitution. When `dirichlet_top` is set,
/// rows at and above that storage index are replaced by u = 0.
/// Throws SolverError on a zero pivot.
void thomas_solve(const TridiagCoeffs& c, std::span<const double> rhs, std::span<double> out,
                  std::optional<int> dirichlet_top = std::nullopt);

[[nodiscard]] std::vector<double> thomas_solve(const TridiagCoeffs& c,
                                               std::span<const double> rhs);

/// One fully implicit step of u_t + mu u_y + 1/2 rhoPerp2 v u_yy = 0 on `grid`,
/// from `terminal` at (n+1)h to the returned values at nh.
[[nodiscard]] std::vector<double> pde_step(const SpaceGrid& grid,
                                           std::span<const double> terminal, double mu_eff,
                                           double v, double rho_perp2, double h);

/// Storage index of the first grid point with y >= ln(H), up to round-off of
/// 1e-9 dy; size() if none.
[[nodiscard]] int barrier_index(const SpaceGrid& grid, double barrier);

}  // namespace hhw
