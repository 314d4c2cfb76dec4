/**
 * @file analysis.hpp
 * @brief Masses, moments, field distances and the power-law fit used to
 *        read off the order of a perturbative remainder.
 *
 * All integrals are trapezoid sums on the grid.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fpp/error.hpp"
#include "fpp/hierarchy.hpp"
#include "fpp/model.hpp"

namespace fpp {

inline double slice_mass(const DensityField& w, std::size_t j)
{
    if (j >= w.grid().nt()) throw std::out_of_range("slice_mass: slice index out of range");
    if (!w.populated(j)) throw std::invalid_argument("slice_mass: slice " + std::to_string(j) + " is not populated");
    return trapezoid(w.slice(j), w.grid().dx());
}

struct Moments {
    double mean;
    double variance;
};

/// Mean and variance of slice j, normalized by its mass. Requires the mass
/// to be 1 within 1e-6.
inline Moments slice_moments(const DensityField& w, std::size_t j)
{
    const double mass = slice_mass(w, j);
    if (std::abs(mass - 1.0) > 1e-6)
        throw InvariantError("slice_moments: slice " + std::to_string(j) + " has mass " + std::to_string(mass));
    const Grid& g = w.grid();
    auto f = w.slice(j);
    std::vector<double> tmp(g.nx());
    for (std::size_t i = 0; i < g.nx(); ++i) tmp[i] = g.x(i) * f[i];
    const double mean = trapezoid(tmp, g.dx()) / mass;
    for (std::size_t i = 0; i < g.nx(); ++i) {
        const double d = g.x(i) - mean;
        tmp[i] = d * d * f[i];
    }
    return {mean, trapezoid(tmp, g.dx()) / mass};
}

enum class Metric { l1, linf, peak_relative_linf };

inline std::string_view metric_name(Metric m)
{
    switch (m) {
    case Metric::l1: return "l1";
    case Metric::linf: return "linf";
    case Metric::peak_relative_linf: return "peak_relative_linf";
    }
    return "";
}

struct SliceDistance {
    std::size_t slice;
    double t;
    double value;
};

/**
 * Per-slice distance over the slices populated in both fields.
 * peak_relative_linf divides by the larger of the two peaks, which keeps the
 * metric symmetric.
 */
inline std::vector<SliceDistance> field_distance(const DensityField& a, const DensityField& b, Metric metric)
{
    if (!(a.grid() == b.grid())) throw std::invalid_argument("field_distance: grids differ");
    const Grid& g = a.grid();
    std::vector<SliceDistance> out;
    std::vector<double> diff(g.nx());
    for (std::size_t j = 0; j < g.nt(); ++j) {
        if (!a.populated(j) || !b.populated(j)) continue;
        auto fa = a.slice(j);
        auto fb = b.slice(j);
        for (std::size_t i = 0; i < g.nx(); ++i) diff[i] = std::abs(fa[i] - fb[i]);
        double value = 0.0;
        switch (metric) {
        case Metric::l1: value = trapezoid(diff, g.dx()); break;
        case Metric::linf: value = *std::max_element(diff.begin(), diff.end()); break;
        case Metric::peak_relative_linf: {
            const double peak = std::max(*std::max_element(fa.begin(), fa.end()), *std::max_element(fb.begin(), fb.end()));
            value = *std::max_element(diff.begin(), diff.end()) / peak;
            break;
        }
        }
        out.push_back({j, g.t(j), value});
    }
    return out;
}

inline double max_value(const std::vector<SliceDistance>& d)
{
    double worst = 0.0;
    for (const auto& s : d) worst = std::max(worst, s.value);
    return worst;
}

/// Least-squares slope of log(error) against log|lambda|.
inline double scaling_order_fit(std::span<const std::pair<double, double>> points)
{
    if (points.size() < 3) throw std::invalid_argument("scaling_order_fit: need at least 3 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [lambda, err] : points) {
        if (!(err > 0.0) || !std::isfinite(err))
            throw std::invalid_argument("scaling_order_fit: errors must be positive and finite");
        if (lambda == 0.0) throw std::invalid_argument("scaling_order_fit: lambda must be non-zero");
        const double x = std::log(std::abs(lambda));
        const double y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const bool all_same = std::all_of(points.begin(), points.end(), [&](const auto& p) {
        return std::abs(p.first) == std::abs(points.front().first);
    });
    const double n = static_cast<double>(points.size());
    const double denom = n * sxx - sx * sx;
    if (all_same || denom == 0.0) throw std::invalid_argument("scaling_order_fit: lambdas must not all coincide");
    return (n * sxy - sx * sy) / denom;
}

/// Sample f(x, t) on every node.
template <class F>
DensityField tabulate_density(const Grid& grid, F&& f, double mass_tolerance)
{
    DensityField w(grid, mass_tolerance);
    for (std::size_t j = 0; j < grid.nt(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i) w(j, i) = f(grid.x(i), grid.t(j));
    return w;
}

/// max over nodes of |field - exact(x, t)|
template <class F>
double max_abs_error(const detail::GridArray& field, F&& exact)
{
    const Grid& g = field.grid();
    double worst = 0.0;
    for (std::size_t j = 0; j < g.nt(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i)
            worst = std::max(worst, std::abs(field(j, i) - exact(g.x(i), g.t(j))));
    return worst;
}

/// max-abs of a field after subtracting each slice's mean value.
inline double max_abs_about_slice_mean(const ScalarField& field)
{
    const Grid& g = field.grid();
    double worst = 0.0;
    for (std::size_t j = 0; j < g.nt(); ++j) {
        auto f = field.slice(j);
        double mean = 0.0;
        for (double v : f) mean += v;
        mean /= static_cast<double>(f.size());
        for (double v : f) worst = std::max(worst, std::abs(v - mean));
    }
    return worst;
}

/**
 * Linear interpolation in x of `fine` onto `coarse`. Every coarse slice time
 * must be a slice of the fine grid.
 */
inline DensityField resample(const DensityField& fine, const Grid& coarse)
{
    const Grid& g = fine.grid();
    DensityField out(coarse, fine.mass_tolerance());
    for (std::size_t j = 0; j < coarse.nt(); ++j) {
        const auto src = g.slice_at(coarse.t(j));
        if (!src) throw std::invalid_argument("resample: coarse slice time missing from the fine grid");
        if (!fine.populated(*src)) {
            out.set_populated(j, false);
            continue;
        }
        auto f = fine.slice(*src);
        for (std::size_t i = 0; i < coarse.nx(); ++i) {
            const double x = coarse.x(i);
            if (x < g.x_min() || x > g.x_max()) {
                out(j, i) = 0.0;
                continue;
            }
            const double pos = (x - g.x_min()) / g.dx();
            const std::size_t k = std::min(static_cast<std::size_t>(pos), g.nx() - 2);
            const double frac = pos - static_cast<double>(k);
            out(j, i) = (1.0 - frac) * f[k] + frac * f[k + 1];
        }
    }
    return out;
}

/// Lowest value a density may take before it counts as negative.
inline constexpr double density_floor = -1e-12;

/**
 * Check the emission contract of a density: on every populated slice the
 * values are finite, none is below density_floor, and the trapezoid mass is
 * within the producer's tolerance of 1. Throws InvariantError.
 */
inline void verify_density(const DensityField& w, std::string_view name)
{
    for (std::size_t j : w.populated_slices()) {
        auto f = w.slice(j);
        for (double v : f) {
            if (!std::isfinite(v))
                throw InvariantError(std::string(name) + ": non-finite value in slice " + std::to_string(j));
            if (v < density_floor)
                throw InvariantError(std::string(name) + ": negative value " + std::to_string(v) + " in slice " +
                                     std::to_string(j));
        }
        const double mass = slice_mass(w, j);
        if (!(std::abs(mass - 1.0) <= w.mass_tolerance()))
            throw InvariantError(std::string(name) + ": slice " + std::to_string(j) + " has mass " +
                                 std::to_string(mass));
    }
}

}  // namespace fpp
