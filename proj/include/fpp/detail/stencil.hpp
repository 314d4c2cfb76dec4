#pragma once

#include <cstddef>
#include <span>

namespace fpp::detail {

/// df/dx at node i: centered in the interior, one-sided second order at the
/// two end nodes. Needs f.size() >= 3.
inline double first_derivative(std::span<const double> f, std::size_t i, double dx)
{
    const std::size_t n = f.size();
    if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    if (i == n - 1) return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    return (f[i + 1] - f[i - 1]) / (2.0 * dx);
}

/// d2f/dx2 at an interior node.
inline double second_derivative(std::span<const double> f, std::size_t i, double dx)
{
    return (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dx * dx);
}

}  // namespace fpp::detail
