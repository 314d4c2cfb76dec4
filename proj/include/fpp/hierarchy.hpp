/**
 * @file hierarchy.hpp
 * @brief Order-by-order solution of the action expansion S = sum lambda^n S_n.
 *
 * With U_0 = 0 and a delta initial profile the leading term is closed form,
 *   S_0 = -(D/2) ln(4 pi D t) - x^2/4t,   so 2 S_0' = -x/t,
 * and each higher order solves the linear parabolic problem
 *   dS_n/dt = D S_n'' - (x/t) S_n' + q_n,
 *   q_n     = sum_{k=1}^{n-1} S_k' S_{n-k}' + Ubar_n.
 * The density is W = exp(-U/2D) exp(S/D).
 *
 * The grid starts at t0 > 0; initial slices S_n(., t0) come from the closed
 * forms for the built-in drift families (zero otherwise).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpp/config.hpp"
#include "fpp/detail/stencil.hpp"
#include "fpp/detail/tridiagonal.hpp"
#include "fpp/error.hpp"
#include "fpp/model.hpp"
#include "fpp/oracles.hpp"
#include "fpp/transform.hpp"

namespace fpp {

/// How the S_n solve closes the two boundary columns.
enum class BoundaryClosure {
    linear,    ///< S'' = 0 at the boundary (ghost node by linear extrapolation)
    quadratic  ///< S''' = 0 at the boundary (one-sided second-order S' and S'')
};

enum class Normalization {
    per_slice,  ///< divide every slice by its trapezoid mass
    none        ///< keep the constants the action terms carry
};

struct CascadeOptions {
    BoundaryClosure closure = BoundaryClosure::quadratic;
    /// Largest allowed ratio of leading-order density at the boundary to its peak.
    double boundary_tol = 1e-12;
    /// Throw when boundary_tol is exceeded instead of only recording the ratio.
    bool enforce_boundary_decay = false;
};

/**
 * ActionExpansion: S_0..S_N on one grid, plus D and lambda.
 */
class ActionExpansion {
public:
    ActionExpansion(double d_coeff, double lambda, std::vector<ScalarField> terms)
        : d_coeff_(d_coeff), lambda_(lambda), terms_(std::move(terms))
    {
        if (terms_.empty()) throw std::invalid_argument("ActionExpansion: needs at least S_0");
        for (std::size_t n = 0; n < terms_.size(); ++n) {
            if (!(terms_[n].grid() == terms_.front().grid()))
                throw std::invalid_argument("ActionExpansion: terms live on different grids");
            if (terms_[n].tag() != FieldTag{Quantity::action_term, static_cast<int>(n)})
                throw std::invalid_argument("ActionExpansion: term " + std::to_string(n) + " has the wrong tag");
        }
    }

    double d_coeff() const noexcept { return d_coeff_; }
    double lambda() const noexcept { return lambda_; }
    int order() const noexcept { return static_cast<int>(terms_.size()) - 1; }
    const Grid& grid() const noexcept { return terms_.front().grid(); }
    std::span<const ScalarField> terms() const noexcept { return terms_; }
    const ScalarField& term(int n) const { return terms_.at(static_cast<std::size_t>(n)); }

    /// Partial sum sum_n lambda^n S_n at node (j, i).
    double action(std::size_t j, std::size_t i) const
    {
        double total = terms_[0](j, i);
        double power = 1.0;
        for (std::size_t n = 1; n < terms_.size(); ++n) {
            power *= lambda_;
            total += power * terms_[n](j, i);
        }
        return total;
    }

    /// Largest leading-order boundary-to-peak density ratio over all slices.
    double boundary_ratio() const noexcept { return boundary_ratio_; }
    void set_boundary_ratio(double r) noexcept { boundary_ratio_ = r; }

private:
    double d_coeff_;
    double lambda_;
    std::vector<ScalarField> terms_;
    double boundary_ratio_ = 0.0;
};

inline ScalarField s0_closed_form(const Grid& grid, double D)
{
    if (!(D > 0.0)) throw std::invalid_argument("s0_closed_form: D must be > 0");
    ScalarField s0(grid, {Quantity::action_term, 0});
    for (std::size_t j = 0; j < grid.nt(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i) s0(j, i) = oracles::s0(grid.x(i), grid.t(j), D);
    return s0;
}

/// Source q_n of the order-n equation from the already solved S_1..S_{n-1}.
inline ScalarField cascade_source(int n, const DriftSpec& drift, double D, std::span<const ScalarField> solved)
{
    if (n < 1) throw std::invalid_argument("cascade_source: n must be >= 1");
    if (solved.size() < static_cast<std::size_t>(n))
        throw std::invalid_argument("cascade_source: order " + std::to_string(n) + " needs S_0..S_" +
                                    std::to_string(n - 1) + ", only " + std::to_string(solved.size()) +
                                    " terms given");
    const Grid& g = solved.front().grid();
    const std::size_t nx = g.nx();
    const double dx = g.dx();
    const bool has_potential = n <= 2 * drift.max_order();

    ScalarField q(g, {Quantity::effective_potential, n});
    std::vector<std::vector<double>> grad(static_cast<std::size_t>(n), std::vector<double>(nx));
    for (std::size_t j = 0; j < g.nt(); ++j) {
        for (int k = 1; k < n; ++k) {
            auto f = solved[static_cast<std::size_t>(k)].slice(j);
            for (std::size_t i = 0; i < nx; ++i) grad[k][i] = detail::first_derivative(f, i, dx);
        }
        const double t = g.t(j);
        for (std::size_t i = 0; i < nx; ++i) {
            double value = has_potential ? effective_potential_order(drift, D, n, g.x(i), t) : 0.0;
            for (int k = 1; k < n; ++k) value += grad[k][i] * grad[n - k][i];
            q(j, i) = value;
        }
    }
    return q;
}

inline ScalarField cascade_source(int n, const DriftSpec& drift, double D, const ActionExpansion& solved)
{
    return cascade_source(n, drift, D, solved.terms());
}

namespace detail {

// Three stencil weights applied to columns first_col .. first_col + 2.
struct StencilRow {
    std::size_t first_col;
    double w[3];
};

// Discrete D d2/dx2 + c(x) d/dx at node i with the given boundary closure.
inline StencilRow cascade_operator_row(std::size_t i, std::size_t nx, double D, double c, double dx,
                                       BoundaryClosure closure)
{
    const double diff = D / (dx * dx);
    const double adv = c / (2.0 * dx);
    if (i == 0) {
        if (closure == BoundaryClosure::linear) return {0, {-c / dx, c / dx, 0.0}};
        return {0, {diff - 3.0 * adv, -2.0 * diff + 4.0 * adv, diff - adv}};
    }
    if (i == nx - 1) {
        if (closure == BoundaryClosure::linear) return {nx - 3, {0.0, -c / dx, c / dx}};
        return {nx - 3, {diff + adv, -2.0 * diff - 4.0 * adv, diff + 3.0 * adv}};
    }
    return {i - 1, {diff - adv, -2.0 * diff, diff + adv}};
}

}  // namespace detail

/**
 * Crank-Nicolson solve of dS/dt = D S'' - (x/t) S' + q from the slice `init`
 * at t0. The advection coefficient is taken at the half step.
 */
inline ScalarField advance_term(int n, const ScalarField& source, double D, std::span<const double> init,
                                BoundaryClosure closure = BoundaryClosure::quadratic)
{
    const Grid& g = source.grid();
    const std::size_t nx = g.nx();
    if (init.size() != nx) throw std::invalid_argument("advance_term: init slice has the wrong length");
    const double dx = g.dx();
    const double h = 0.5 * g.dt();

    ScalarField s(g, {Quantity::action_term, n});
    std::copy(init.begin(), init.end(), s.slice(0).begin());

    std::vector<detail::StencilRow> rows(nx);
    for (std::size_t j = 0; j + 1 < g.nt(); ++j) {
        const double t_half = 0.5 * (g.t(j) + g.t(j + 1));
        for (std::size_t i = 0; i < nx; ++i)
            rows[i] = detail::cascade_operator_row(i, nx, D, -g.x(i) / t_half, dx, closure);

        auto prev = s.slice(j);
        auto q0 = source.slice(j);
        auto q1 = source.slice(j + 1);
        detail::Tridiagonal sys(nx);
        for (std::size_t i = 0; i < nx; ++i) {
            const auto& r = rows[i];
            double applied = 0.0;
            for (int k = 0; k < 3; ++k) applied += r.w[k] * prev[r.first_col + k];
            sys.rhs[i] = prev[i] + h * applied + h * (q0[i] + q1[i]);
        }
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            sys.lower[i] = -h * rows[i].w[0];
            sys.diag[i] = 1.0 - h * rows[i].w[1];
            sys.upper[i] = -h * rows[i].w[2];
        }
        // Boundary rows reach one column beyond tridiagonal; fold that entry
        // away with the neighbouring row.
        {
            const auto& r = rows[0];
            double a0 = 1.0 - h * r.w[0], a1 = -h * r.w[1], a2 = -h * r.w[2];
            if (a2 != 0.0) {
                if (sys.upper[1] == 0.0)
                    throw SolverError("advance_term: order " + std::to_string(n) +
                                      ": cannot close left boundary at step " + std::to_string(j));
                const double m = a2 / sys.upper[1];
                a0 -= m * sys.lower[1];
                a1 -= m * sys.diag[1];
                sys.rhs[0] -= m * sys.rhs[1];
            }
            sys.diag[0] = a0;
            sys.upper[0] = a1;
        }
        {
            const std::size_t last = nx - 1;
            const auto& r = rows[last];
            double a0 = -h * r.w[0], a1 = -h * r.w[1], a2 = 1.0 - h * r.w[2];
            if (a0 != 0.0) {
                if (sys.lower[last - 1] == 0.0)
                    throw SolverError("advance_term: order " + std::to_string(n) +
                                      ": cannot close right boundary at step " + std::to_string(j));
                const double m = a0 / sys.lower[last - 1];
                a1 -= m * sys.diag[last - 1];
                a2 -= m * sys.upper[last - 1];
                sys.rhs[last] -= m * sys.rhs[last - 1];
            }
            sys.lower[last] = a1;
            sys.diag[last] = a2;
        }

        if (!detail::solve_in_place(sys))
            throw SolverError("advance_term: order " + std::to_string(n) + ": singular tridiagonal system at step " +
                              std::to_string(j));
        auto next = s.slice(j + 1);
        for (std::size_t i = 0; i < nx; ++i) {
            if (!std::isfinite(sys.rhs[i]))
                throw SolverError("advance_term: order " + std::to_string(n) + ": non-finite value at step " +
                                  std::to_string(j));
            next[i] = sys.rhs[i];
        }
    }
    return s;
}

namespace detail {

// max_j exp((max(S_0 at the two ends) - max_i S_0) / D)
inline double leading_boundary_ratio(const ScalarField& s0, double D)
{
    const Grid& g = s0.grid();
    double worst = 0.0;
    for (std::size_t j = 0; j < g.nt(); ++j) {
        auto f = s0.slice(j);
        const double peak = *std::max_element(f.begin(), f.end());
        const double edge = std::max(f.front(), f.back());
        worst = std::max(worst, std::exp((edge - peak) / D));
    }
    return worst;
}

inline void require_supported_drift(const DriftSpec& drift, int order)
{
    if (!drift.term(0).is_zero())
        throw ConfigError("cascade: a non-zero base potential U_0 is not supported (U_0 must vanish)");
    if (order < 0 || order > max_expansion_order)
        throw ConfigError("cascade: order " + std::to_string(order) + " outside [0, " +
                          std::to_string(max_expansion_order) + "]");
}

}  // namespace detail

/**
 * Solve S_0..S_order numerically on `grid`. S_0 is closed form; every higher
 * order is a Crank-Nicolson solve sourced by the lower ones.
 */
inline ActionExpansion solve_expansion(const DriftSpec& drift, double D, double lambda, int order, const Grid& grid,
                                       const CascadeOptions& options = {})
{
    detail::require_supported_drift(drift, order);
    if (!(D > 0.0)) throw ConfigError("cascade: D must be > 0");

    std::vector<ScalarField> terms;
    terms.reserve(static_cast<std::size_t>(order) + 1);
    terms.push_back(s0_closed_form(grid, D));

    const double ratio = detail::leading_boundary_ratio(terms.front(), D);
    if (options.enforce_boundary_decay && ratio > options.boundary_tol)
        throw SolverError("cascade: leading-order density at the boundary is " + std::to_string(ratio) +
                          " of its peak (limit " + std::to_string(options.boundary_tol) + "); widen the domain");

    std::vector<double> init(grid.nx());
    for (int n = 1; n <= order; ++n) {
        for (std::size_t i = 0; i < grid.nx(); ++i)
            init[i] = oracles::action_term(drift, n, grid.x(i), grid.t0(), D).value_or(0.0);
        try {
            ScalarField q = cascade_source(n, drift, D, std::span<const ScalarField>(terms));
            terms.push_back(advance_term(n, q, D, init, options.closure));
        } catch (const SolverError& e) {
            throw SolverError("cascade order " + std::to_string(n) + ": " + e.what());
        }
    }
    ActionExpansion out(D, lambda, std::move(terms));
    out.set_boundary_ratio(ratio);
    return out;
}

/// The same expansion built entirely from closed forms.
inline ActionExpansion analytic_expansion(const DriftSpec& drift, double D, double lambda, int order, const Grid& grid)
{
    detail::require_supported_drift(drift, order);
    const int limit = oracles::closed_form_order_limit(drift);
    if (limit >= 0 && order > limit)
        throw ConfigError("analytic expansion: no closed form beyond order " + std::to_string(limit) + " for " +
                          to_string(drift.family()));
    std::vector<ScalarField> terms;
    terms.push_back(s0_closed_form(grid, D));
    for (int n = 1; n <= order; ++n) {
        ScalarField s(grid, {Quantity::action_term, n});
        for (std::size_t j = 0; j < grid.nt(); ++j)
            for (std::size_t i = 0; i < grid.nx(); ++i)
                s(j, i) = *oracles::action_term(drift, n, grid.x(i), grid.t(j), D);
        terms.push_back(std::move(s));
    }
    ActionExpansion out(D, lambda, std::move(terms));
    out.set_boundary_ratio(detail::leading_boundary_ratio(out.term(0), D));
    return out;
}

/// Trapezoid integral of one slice.
inline double trapezoid(std::span<const double> f, double dx)
{
    double sum = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
    return sum * dx;
}

/**
 * W = exp(-U/2D) exp(S/D) on the expansion's grid.
 *
 * With per-slice normalization the constants dropped from the action terms
 * are restored by dividing each slice by its trapezoid mass; the result then
 * has unit mass to 1e-12. Without it no mass is promised (the tolerance is
 * infinite) and the values are exactly what the action terms give.
 */
inline DensityField assemble_density(const ActionExpansion& expansion, const DriftSpec& drift,
                                     Normalization normalization = Normalization::per_slice)
{
    const Grid& g = expansion.grid();
    const double D = expansion.d_coeff();
    const double lambda = expansion.lambda();
    const double tol = normalization == Normalization::per_slice ? 1e-12 : std::numeric_limits<double>::infinity();
    DensityField w(g, tol);
    for (std::size_t j = 0; j < g.nt(); ++j) {
        const double t = g.t(j);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double exponent = expansion.action(j, i) / D - drift.potential(g.x(i), t, lambda) / (2.0 * D);
            w(j, i) = detail::checked_exp(exponent, g, j, i, "assemble_density");
        }
        if (normalization == Normalization::per_slice) {
            auto slice = w.slice(j);
            const double mass = trapezoid(slice, g.dx());
            if (!(mass > 0.0) || !std::isfinite(mass))
                throw SolverError("assemble_density: slice " + std::to_string(j) + " has no mass to normalize");
            for (double& v : slice) v /= mass;
        }
    }
    return w;
}

/**
 * Max-abs residual of the order-n equation over interior nodes, with
 * centered differences in both x and t.
 */
inline double cascade_residual(int n, const ActionExpansion& expansion, const DriftSpec& drift)
{
    if (n < 1 || n > expansion.order())
        throw std::invalid_argument("cascade_residual: order " + std::to_string(n) + " not solved");
    const Grid& g = expansion.grid();
    const double D = expansion.d_coeff();
    const double dx = g.dx();
    const double dt = g.dt();
    const ScalarField q = cascade_source(n, drift, D, expansion.terms().first(static_cast<std::size_t>(n)));
    const ScalarField& s = expansion.term(n);

    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < g.nt(); ++j) {
        auto f = s.slice(j);
        const double t = g.t(j);
        for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
            const double rate = (s(j + 1, i) - s(j - 1, i)) / (2.0 * dt);
            const double rhs = D * detail::second_derivative(f, i, dx) -
                               (g.x(i) / t) * detail::first_derivative(f, i, dx) + q(j, i);
            worst = std::max(worst, std::abs(rate - rhs));
        }
    }
    return worst;
}

}  // namespace fpp
