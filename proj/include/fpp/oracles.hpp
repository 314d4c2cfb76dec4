/**
 * @file oracles.hpp
 * @brief Closed-form solutions used as ground truth.
 *
 * Everything here is a direct formula evaluation: no quadrature, no
 * stepping. Integration constants follow two rules: terms proportional to
 * x/t are dropped (finiteness as t -> 0) and additive constants are dropped
 * (they only rescale the density).
 */

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "fpp/model.hpp"

namespace fpp::oracles {

// --- Wiener process --------------------------------------------------------

/// Leading action S_0 = -(D/2) ln(4 pi D t) - x^2 / 4t.
inline double s0(double x, double t, double D)
{
    return -0.5 * D * std::log(4.0 * std::numbers::pi * D * t) - x * x / (4.0 * t);
}

/// Heat kernel W_0 = exp(S_0 / D) = (4 pi D t)^(-1/2) exp(-x^2 / 4Dt).
inline double w0_diffusion(double x, double t, double D) { return std::exp(s0(x, t, D) / D); }

// --- Linear drift potential lambda x V(t) ----------------------------------

/// S_1 = (x/2) V(t) - (x/2t) Vbar(t)
inline double example1_s1(double x, double t, const Modulation& v)
{
    return 0.5 * x * v.value(t) - 0.5 * x * v.integral(t) / t;
}

/// S_2 = -Vbar(t)^2 / 4t
inline double example1_s2(double, double t, const Modulation& v)
{
    const double vbar = v.integral(t);
    return -vbar * vbar / (4.0 * t);
}

/// Heat kernel translated by -lambda Vbar(t); exact for every lambda.
inline double example1_density_exact(double x, double t, double D, double lambda, const Modulation& v)
{
    return w0_diffusion(x + lambda * v.integral(t), t, D);
}

// --- Ornstein-Uhlenbeck, U = lambda x^2 / 2 ---------------------------------

/// D (1 - exp(-2 lambda t)) / lambda, lambda != 0.
inline double ou_variance(double t, double D, double lambda)
{
    if (lambda == 0.0) throw std::domain_error("ou_variance: lambda = 0, use the Wiener limit 2Dt");
    return -D * std::expm1(-2.0 * lambda * t) / lambda;
}

inline double ou_density_exact(double x, double t, double D, double lambda)
{
    if (lambda == 0.0) throw std::domain_error("ou_density_exact: lambda = 0, use w0_diffusion");
    const double var = ou_variance(t, D, lambda);
    return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// S_1 = D t / 2
inline double ou_s1(double t, double D) { return 0.5 * D * t; }

/// S_2 = -D t^2 / 12 - x^2 t / 12
inline double ou_s2(double x, double t, double D) { return -D * t * t / 12.0 - x * x * t / 12.0; }

/// 1 + lambda t + lambda^2 t^2 / 3
inline double ou_resummation_factor(double lambda, double t)
{
    const double lt = lambda * t;
    return 1.0 + lt + lt * lt / 3.0;
}

/// Order-2 perturbative OU density after resumming the time-only exponent
/// into a normalization prefactor.
inline double ou_density_pert(double x, double t, double D, double lambda)
{
    if (lambda == 0.0) return w0_diffusion(x, t, D);
    const double f = ou_resummation_factor(lambda, t);
    if (!(f > 0.0)) throw std::domain_error("ou_density_pert: non-positive resummation factor");
    return std::sqrt(f / (4.0 * std::numbers::pi * D * t)) * std::exp(-x * x * f / (4.0 * D * t));
}

/// |(lambda t/2 - lambda^2 t^2/12) - (1/2) ln(1 + lambda t + lambda^2 t^2/3)|
inline double log_resummation_gap(double lambda, double t)
{
    const double lt = lambda * t;
    const double f = ou_resummation_factor(lambda, t);
    if (!(f > 0.0)) throw std::domain_error("log_resummation_gap: non-positive resummation factor");
    return std::abs((0.5 * lt - lt * lt / 12.0) - 0.5 * std::log1p(lt + lt * lt / 3.0));
}

// --- Dispatch over the built-in drift families ------------------------------

/// Closed-form S_n for a built-in family, when one exists.
inline std::optional<double> action_term(const DriftSpec& drift, int n, double x, double t, double D)
{
    if (n == 0) return s0(x, t, D);
    switch (drift.family()) {
    case DriftFamily::zero: return 0.0;
    case DriftFamily::linear_time_modulated: {
        const Modulation& v = *drift.modulation();
        if (n == 1) return example1_s1(x, t, v);
        if (n == 2) return example1_s2(x, t, v);
        return 0.0;
    }
    case DriftFamily::quadratic_ou:
        if (n == 1) return ou_s1(t, D);
        if (n == 2) return ou_s2(x, t, D);
        return std::nullopt;
    }
    return std::nullopt;
}

/// Highest order with a closed-form action term (-1 = unbounded).
inline int closed_form_order_limit(const DriftSpec& drift)
{
    return drift.family() == DriftFamily::quadratic_ou ? 2 : -1;
}

/// Exact density of the full problem, with lambda = 0 sent to the heat kernel.
inline double exact_density(const DriftSpec& drift, double x, double t, double D, double lambda)
{
    switch (drift.family()) {
    case DriftFamily::zero: return w0_diffusion(x, t, D);
    case DriftFamily::linear_time_modulated: return example1_density_exact(x, t, D, lambda, *drift.modulation());
    case DriftFamily::quadratic_ou:
        return lambda == 0.0 ? w0_diffusion(x, t, D) : ou_density_exact(x, t, D, lambda);
    }
    return 0.0;
}

struct GaussianMoments {
    double mean;
    double variance;
};

/// Mean and variance of the exact (Gaussian) density at time t.
inline GaussianMoments exact_moments(const DriftSpec& drift, double t, double D, double lambda)
{
    switch (drift.family()) {
    case DriftFamily::zero: break;
    case DriftFamily::linear_time_modulated:
        return {-lambda * drift.modulation()->integral(t), 2.0 * D * t};
    case DriftFamily::quadratic_ou:
        if (lambda != 0.0) return {0.0, ou_variance(t, D, lambda)};
        break;
    }
    return {0.0, 2.0 * D * t};
}

}  // namespace fpp::oracles
