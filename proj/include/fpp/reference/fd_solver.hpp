/**
 * @file fd_solver.hpp
 * @brief Direct Crank-Nicolson integration of the Fokker-Planck equation
 *
 *   dW/dt = d/dx (U'(x,t) W) + D d2W/dx2
 *
 * in flux form with centered differences and absorbing (W = 0) ends. The
 * flux form telescopes, so the trapezoid mass only changes through the
 * boundary columns.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "fpp/detail/tridiagonal.hpp"
#include "fpp/error.hpp"
#include "fpp/hierarchy.hpp"
#include "fpp/model.hpp"

namespace fpp {

struct FdOptions {
    /// Internal steps per grid step; 0 picks the smallest count with
    /// dt_internal <= step_safety * dx^2 / (2D).
    std::size_t substeps = 0;
    double step_safety = 1.0;
    double mass_tol = 1e-8;
    /// Largest density next to the absorbing ends, relative to the slice peak.
    double boundary_tol = 1e-12;
    /// Most negative value tolerated.
    double undershoot_tol = 1e-12;
};

inline std::size_t fd_substeps(const Grid& grid, double D, const FdOptions& options)
{
    if (options.substeps > 0) return options.substeps;
    const double limit = options.step_safety * grid.dx() * grid.dx() / (2.0 * D);
    return static_cast<std::size_t>(std::max(1.0, std::ceil(grid.dt() / limit - 1e-12)));
}

namespace detail {

inline double boundary_leak(std::span<const double> w)
{
    const double peak = *std::max_element(w.begin(), w.end());
    if (!(peak > 0.0)) return 0.0;
    const std::size_t n = w.size();
    return std::max({std::abs(w[0]), std::abs(w[1]), std::abs(w[n - 2]), std::abs(w[n - 1])}) / peak;
}

}  // namespace detail

/**
 * Solve from `w_init` (the density at grid.t0()) across the whole grid.
 * Throws SolverError on mass drift, undershoot or boundary leakage, naming
 * the first offending step.
 */
inline DensityField fp_fd_solve(const DriftSpec& drift, double D, double lambda, const Grid& grid,
                                std::span<const double> w_init, const FdOptions& options = {})
{
    const std::size_t nx = grid.nx();
    const double dx = grid.dx();
    if (!(D > 0.0)) throw ConfigError("fd: D must be > 0");
    if (w_init.size() != nx) throw std::invalid_argument("fd: initial slice has the wrong length");
    if (*std::min_element(w_init.begin(), w_init.end()) < -options.undershoot_tol)
        throw std::invalid_argument("fd: initial slice has negative values");
    if (std::abs(trapezoid(w_init, dx) - 1.0) > 1e-8)
        throw std::invalid_argument("fd: initial slice mass is not 1 within 1e-8");
    if (detail::boundary_leak(w_init) > options.boundary_tol)
        throw SolverError("fd: initial density reaches the boundary; widen the domain");

    const std::size_t m = fd_substeps(grid, D, options);
    const double h = 0.5 * grid.dt() / static_cast<double>(m);
    const double diff = D / (dx * dx);
    const double inv2dx = 1.0 / (2.0 * dx);

    DensityField w(grid, options.mass_tol);
    std::copy(w_init.begin(), w_init.end(), w.slice(0).begin());
    w(0, 0) = 0.0;
    w(0, nx - 1) = 0.0;

    std::vector<double> cur(w.slice(0).begin(), w.slice(0).end());
    std::vector<double> f_old(nx), f_new(nx);
    for (std::size_t j = 0; j + 1 < grid.nt(); ++j) {
        for (std::size_t s = 0; s < m; ++s) {
            const double t_old = grid.t(j) + 2.0 * h * static_cast<double>(s);
            const double t_new = grid.t(j) + 2.0 * h * static_cast<double>(s + 1);
            for (std::size_t i = 0; i < nx; ++i) {
                f_old[i] = drift.gradient(grid.x(i), t_old, lambda);
                f_new[i] = drift.gradient(grid.x(i), t_new, lambda);
            }
            detail::Tridiagonal sys(nx);
            sys.diag[0] = 1.0;
            sys.diag[nx - 1] = 1.0;
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                const double applied = (f_old[i + 1] * cur[i + 1] - f_old[i - 1] * cur[i - 1]) * inv2dx +
                                       diff * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]);
                sys.rhs[i] = cur[i] + h * applied;
                sys.lower[i] = -h * (diff - f_new[i - 1] * inv2dx);
                sys.diag[i] = 1.0 + 2.0 * h * diff;
                sys.upper[i] = -h * (diff + f_new[i + 1] * inv2dx);
            }
            if (!detail::solve_in_place(sys))
                throw SolverError("fd: singular system at step " + std::to_string(j));
            cur.swap(sys.rhs);
        }

        std::copy(cur.begin(), cur.end(), w.slice(j + 1).begin());
        auto slice = w.slice(j + 1);
        const double mass = trapezoid(slice, dx);
        if (!std::isfinite(mass) || std::abs(mass - 1.0) > options.mass_tol)
            throw SolverError("fd: mass drifted to " + std::to_string(mass) + " at step " + std::to_string(j + 1));
        const double low = *std::min_element(slice.begin(), slice.end());
        if (low < -options.undershoot_tol)
            throw SolverError("fd: undershoot " + std::to_string(low) + " at step " + std::to_string(j + 1));
        if (detail::boundary_leak(slice) > options.boundary_tol)
            throw SolverError("fd: density reaches the boundary at step " + std::to_string(j + 1) +
                              "; widen the domain");
    }
    return w;
}

}  // namespace fpp
