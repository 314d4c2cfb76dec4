/**
 * @file model.hpp
 * @brief Shared domain types: space-time grid, fields on the grid and the
 *        drift potential families U(x,t) = sum_n lambda^n U_n(x,t).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpp/error.hpp"

namespace fpp {

/**
 * Grid: uniform lattice [x_min, x_max] x [t0, t_max].
 *
 * The start time t0 is strictly positive; the delta-function initial
 * condition of the underlying problem sits at t = 0, off the grid.
 * Node coordinates are always recomputed as x_min + i*dx, so regenerating
 * them is bit-reproducible.
 */
class Grid {
public:
    Grid(double x_min, double x_max, std::size_t nx, double t0, double t_max, std::size_t nt)
        : x_min_(x_min), x_max_(x_max), nx_(nx), t0_(t0), t_max_(t_max), nt_(nt)
    {
        if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max))
            throw ConfigError("grid: require finite x_min < x_max");
        if (nx < 3)
            throw ConfigError("grid: nx must be >= 3 to form a second difference (got " +
                              std::to_string(nx) + ")");
        if (!std::isfinite(t0) || !(t0 > 0.0))
            throw ConfigError("grid: t0 must be > 0 (singular start time at t = 0)");
        if (!std::isfinite(t_max) || !(t_max > t0))
            throw ConfigError("grid: t_max must exceed t0");
        if (nt < 2)
            throw ConfigError("grid: nt must be >= 2 (got " + std::to_string(nt) + ")");
    }

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t nx() const noexcept { return nx_; }
    double t0() const noexcept { return t0_; }
    double t_max() const noexcept { return t_max_; }
    std::size_t nt() const noexcept { return nt_; }

    double dx() const noexcept { return (x_max_ - x_min_) / static_cast<double>(nx_ - 1); }
    double dt() const noexcept { return (t_max_ - t0_) / static_cast<double>(nt_ - 1); }

    double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx(); }
    double t(std::size_t j) const noexcept { return t0_ + static_cast<double>(j) * dt(); }

    std::size_t size() const noexcept { return nx_ * nt_; }

    /// Index of the time slice whose node coincides with `t`, if any.
    std::optional<std::size_t> slice_at(double time) const noexcept
    {
        const double pos = (time - t0_) / dt();
        const double rounded = std::round(pos);
        if (rounded < 0.0 || rounded > static_cast<double>(nt_ - 1))
            return std::nullopt;
        if (std::abs(pos - rounded) > 1e-9)
            return std::nullopt;
        return static_cast<std::size_t>(rounded);
    }

    bool operator==(const Grid&) const = default;

private:
    double x_min_;
    double x_max_;
    std::size_t nx_;
    double t0_;
    double t_max_;
    std::size_t nt_;
};

namespace detail {

// Row-major (nt, nx) storage shared by the field types.
class GridArray {
public:
    explicit GridArray(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

    GridArray(Grid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values))
    {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("field: value count does not match grid");
    }

    const Grid& grid() const noexcept { return grid_; }

    double operator()(std::size_t j, std::size_t i) const { return values_[j * grid_.nx() + i]; }
    double& operator()(std::size_t j, std::size_t i) { return values_[j * grid_.nx() + i]; }

    std::span<const double> slice(std::size_t j) const
    {
        return {values_.data() + j * grid_.nx(), grid_.nx()};
    }
    std::span<double> slice(std::size_t j) { return {values_.data() + j * grid_.nx(), grid_.nx()}; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool all_finite() const noexcept
    {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

}  // namespace detail

enum class Quantity { action_term, effective_potential, density, wavefunction };

struct FieldTag {
    Quantity quantity = Quantity::action_term;
    int order = 0;  // n for action terms and effective-potential orders

    bool operator==(const FieldTag&) const = default;
};

/// One scalar quantity (S_n, an effective-potential order, psi) on a grid.
class ScalarField : public detail::GridArray {
public:
    ScalarField(Grid grid, FieldTag tag) : GridArray(std::move(grid)), tag_(tag) {}
    ScalarField(Grid grid, FieldTag tag, std::vector<double> values)
        : GridArray(std::move(grid), std::move(values)), tag_(tag)
    {}

    FieldTag tag() const noexcept { return tag_; }

private:
    FieldTag tag_;
};

/**
 * DensityField: W(x,t) on a grid.
 *
 * Carries the mass tolerance promised by whichever operation produced it,
 * and a per-slice flag for producers that only fill some time slices
 * (Monte Carlo checkpoints).
 */
class DensityField : public detail::GridArray {
public:
    DensityField(Grid grid, double mass_tolerance)
        : GridArray(std::move(grid)), mass_tolerance_(mass_tolerance), populated_(this->grid().nt(), 1)
    {}

    double mass_tolerance() const noexcept { return mass_tolerance_; }

    bool populated(std::size_t j) const { return populated_[j] != 0; }
    void set_populated(std::size_t j, bool flag) { populated_[j] = flag ? 1 : 0; }

    std::vector<std::size_t> populated_slices() const
    {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < populated_.size(); ++j)
            if (populated_[j]) out.push_back(j);
        return out;
    }

private:
    double mass_tolerance_;
    std::vector<char> populated_;
};

// ---------------------------------------------------------------------------
// Drift potentials
// ---------------------------------------------------------------------------

enum class ModulationKind { cosine, sine, constant };

/**
 * Modulation: the time profile V(t) of the linear drift potential x*V(t).
 *
 * integral() is the antiderivative with integral(0) = 0, which is the
 * integration-constant choice that keeps S_1 finite as t -> 0 for every
 * supported profile.
 */
class Modulation {
public:
    static Modulation cosine(double omega) { return {ModulationKind::cosine, checked_omega(omega), 0.0}; }
    static Modulation sine(double omega) { return {ModulationKind::sine, checked_omega(omega), 0.0}; }
    static Modulation constant(double v0)
    {
        if (!std::isfinite(v0)) throw ConfigError("modulation: v0 must be finite");
        return {ModulationKind::constant, 1.0, v0};
    }

    ModulationKind kind() const noexcept { return kind_; }
    double omega() const noexcept { return omega_; }
    double v0() const noexcept { return v0_; }

    double value(double t) const noexcept
    {
        switch (kind_) {
        case ModulationKind::cosine: return std::cos(omega_ * t);
        case ModulationKind::sine: return std::sin(omega_ * t);
        case ModulationKind::constant: break;
        }
        return v0_;
    }

    double rate(double t) const noexcept
    {
        switch (kind_) {
        case ModulationKind::cosine: return -omega_ * std::sin(omega_ * t);
        case ModulationKind::sine: return omega_ * std::cos(omega_ * t);
        case ModulationKind::constant: break;
        }
        return 0.0;
    }

    double integral(double t) const noexcept
    {
        switch (kind_) {
        case ModulationKind::cosine: return std::sin(omega_ * t) / omega_;
        case ModulationKind::sine: {
            // (1 - cos wt)/w without the cancellation at small t
            const double s = std::sin(0.5 * omega_ * t);
            return 2.0 * s * s / omega_;
        }
        case ModulationKind::constant: break;
        }
        return v0_ * t;
    }

    bool operator==(const Modulation&) const = default;

private:
    Modulation(ModulationKind kind, double omega, double v0) : kind_(kind), omega_(omega), v0_(v0) {}

    static double checked_omega(double omega)
    {
        if (!std::isfinite(omega) || !(omega > 0.0)) throw ConfigError("modulation: omega must be > 0");
        return omega;
    }

    ModulationKind kind_;
    double omega_;
    double v0_;
};

/// One order U_n(x,t) of the drift potential with its analytic derivatives.
class PotentialTerm {
public:
    enum class Shape { zero, linear_modulated, quadratic };

    static PotentialTerm zero() { return PotentialTerm(Shape::zero, Modulation::constant(0.0)); }
    /// x * V(t)
    static PotentialTerm linear(Modulation v) { return PotentialTerm(Shape::linear_modulated, v); }
    /// x^2 / 2
    static PotentialTerm quadratic() { return PotentialTerm(Shape::quadratic, Modulation::constant(0.0)); }

    Shape shape() const noexcept { return shape_; }
    bool is_zero() const noexcept { return shape_ == Shape::zero; }

    double value(double x, double t) const noexcept
    {
        switch (shape_) {
        case Shape::linear_modulated: return x * v_.value(t);
        case Shape::quadratic: return 0.5 * x * x;
        case Shape::zero: break;
        }
        return 0.0;
    }

    double dx(double x, double t) const noexcept
    {
        switch (shape_) {
        case Shape::linear_modulated: return v_.value(t);
        case Shape::quadratic: return x;
        case Shape::zero: break;
        }
        return 0.0;
    }

    double dxx(double, double) const noexcept { return shape_ == Shape::quadratic ? 1.0 : 0.0; }

    double dt(double x, double t) const noexcept
    {
        return shape_ == Shape::linear_modulated ? x * v_.rate(t) : 0.0;
    }

private:
    PotentialTerm(Shape shape, Modulation v) : shape_(shape), v_(v) {}

    Shape shape_;
    Modulation v_;
};

enum class DriftFamily { zero, linear_time_modulated, quadratic_ou };

inline std::string to_string(DriftFamily family)
{
    switch (family) {
    case DriftFamily::zero: return "zero";
    case DriftFamily::linear_time_modulated: return "linear_time_modulated";
    case DriftFamily::quadratic_ou: return "quadratic_ou";
    }
    return "unknown";
}

/**
 * DriftSpec: U(x,t) = sum_{n=0}^{N} lambda^n U_n(x,t).
 *
 * The built-in families all have U_0 = 0 and a single non-trivial order
 * U_1; orders above max_order() are identically zero.
 */
class DriftSpec {
public:
    static DriftSpec zero() { return DriftSpec(DriftFamily::zero, {PotentialTerm::zero()}, std::nullopt); }

    static DriftSpec linear_time_modulated(Modulation v)
    {
        return DriftSpec(DriftFamily::linear_time_modulated, {PotentialTerm::zero(), PotentialTerm::linear(v)}, v);
    }

    static DriftSpec quadratic_ou()
    {
        return DriftSpec(DriftFamily::quadratic_ou, {PotentialTerm::zero(), PotentialTerm::quadratic()},
                         std::nullopt);
    }

    DriftFamily family() const noexcept { return family_; }
    std::span<const PotentialTerm> orders() const noexcept { return orders_; }
    int max_order() const noexcept { return static_cast<int>(orders_.size()) - 1; }
    const std::optional<Modulation>& modulation() const noexcept { return modulation_; }

    const PotentialTerm& term(int n) const
    {
        static const PotentialTerm none = PotentialTerm::zero();
        return (n >= 0 && n <= max_order()) ? orders_[static_cast<std::size_t>(n)] : none;
    }

    double potential(double x, double t, double lambda) const
    {
        return sum(lambda, [&](const PotentialTerm& u) { return u.value(x, t); });
    }
    double gradient(double x, double t, double lambda) const
    {
        return sum(lambda, [&](const PotentialTerm& u) { return u.dx(x, t); });
    }
    double curvature(double x, double t, double lambda) const
    {
        return sum(lambda, [&](const PotentialTerm& u) { return u.dxx(x, t); });
    }
    double time_rate(double x, double t, double lambda) const
    {
        return sum(lambda, [&](const PotentialTerm& u) { return u.dt(x, t); });
    }

    /// Drift coefficient D1 = -dU/dx.
    double drift(double x, double t, double lambda) const { return -gradient(x, t, lambda); }

private:
    DriftSpec(DriftFamily family, std::vector<PotentialTerm> orders, std::optional<Modulation> v)
        : family_(family), orders_(std::move(orders)), modulation_(v)
    {}

    template <class F>
    double sum(double lambda, F&& eval) const
    {
        double total = 0.0;
        double power = 1.0;
        for (const auto& u : orders_) {
            total += power * eval(u);
            power *= lambda;
        }
        return total;
    }

    DriftFamily family_;
    std::vector<PotentialTerm> orders_;
    std::optional<Modulation> modulation_;
};

}  // namespace fpp
