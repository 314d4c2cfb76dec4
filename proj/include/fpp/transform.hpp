/**
 * @file transform.hpp
 * @brief Mapping between the Fokker-Planck density W and the
 *        Schroedinger-like wavefunction psi = exp(U/2D) W, and the effective
 *        potential of the transformed equation.
 *
 * With psi = exp(S/D) the action obeys
 *   dS/dt = D S'' + S'^2 + Ubar,   Ubar = (D/2) U'' - (1/4) U'^2 + (1/2) dU/dt.
 */

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fpp/error.hpp"
#include "fpp/model.hpp"

namespace fpp {

/// Ubar(x,t) for the full potential at the given lambda.
inline double effective_potential(const DriftSpec& drift, double D, double lambda, double x, double t)
{
    const double u1 = drift.gradient(x, t, lambda);
    return 0.5 * D * drift.curvature(x, t, lambda) - 0.25 * u1 * u1 + 0.5 * drift.time_rate(x, t, lambda);
}

/**
 * Coefficient of lambda^n in Ubar:
 *   Ubar_n = (D/2) U_n'' + (1/2) dU_n/dt - (1/4) sum_{j+k=n} U_j' U_k'.
 * The quadratic term reaches order 2*max_order.
 */
inline double effective_potential_order(const DriftSpec& drift, double D, int n, double x, double t)
{
    if (n < 0 || n > 2 * drift.max_order())
        throw std::out_of_range("effective_potential_order: n = " + std::to_string(n) + " outside [0, " +
                                std::to_string(2 * drift.max_order()) + "]");
    const PotentialTerm& un = drift.term(n);
    double value = 0.5 * D * un.dxx(x, t) + 0.5 * un.dt(x, t);
    double products = 0.0;
    for (int j = 0; j <= n; ++j)
        products += drift.term(j).dx(x, t) * drift.term(n - j).dx(x, t);
    return value - 0.25 * products;
}

namespace detail {

inline double checked_exp(double exponent, const Grid& grid, std::size_t j, std::size_t i, const char* what)
{
    const double value = std::exp(exponent);
    if (!std::isfinite(value))
        throw OverflowError(std::string(what) + ": exp overflow at node (t index " + std::to_string(j) +
                            ", x index " + std::to_string(i) + "), x = " + std::to_string(grid.x(i)) +
                            ", t = " + std::to_string(grid.t(j)));
    return value;
}

}  // namespace detail

/// psi = exp(U/2D) W, pointwise.
inline ScalarField to_wavefunction(const DensityField& w, const DriftSpec& drift, double D, double lambda)
{
    const Grid& g = w.grid();
    ScalarField psi(g, {Quantity::wavefunction, 0});
    for (std::size_t j = 0; j < g.nt(); ++j) {
        const double t = g.t(j);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double factor =
                detail::checked_exp(drift.potential(g.x(i), t, lambda) / (2.0 * D), g, j, i, "to_wavefunction");
            psi(j, i) = factor * w(j, i);
        }
    }
    return psi;
}

/// W = exp(-U/2D) psi, pointwise. The result carries `mass_tolerance`.
inline DensityField from_wavefunction(const ScalarField& psi, const DriftSpec& drift, double D, double lambda,
                                      double mass_tolerance = 1e-12)
{
    const Grid& g = psi.grid();
    DensityField w(g, mass_tolerance);
    for (std::size_t j = 0; j < g.nt(); ++j) {
        const double t = g.t(j);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double factor =
                detail::checked_exp(-drift.potential(g.x(i), t, lambda) / (2.0 * D), g, j, i, "from_wavefunction");
            w(j, i) = factor * psi(j, i);
        }
    }
    return w;
}

}  // namespace fpp
