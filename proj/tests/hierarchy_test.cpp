#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fpp/analysis.hpp"
#include "fpp/hierarchy.hpp"
#include "fpp/oracles.hpp"

using namespace fpp;

namespace {

const Grid acceptance_grid(-10.0, 10.0, 801, 0.01, 5.0, 500);

DriftSpec cosine_drift() { return DriftSpec::linear_time_modulated(Modulation::cosine(1.0)); }

template <class F>
double term_error(const ActionExpansion& e, int n, F exact)
{
    return max_abs_error(e.term(n), exact);
}

}  // namespace

TEST(LeadingTerm, MatchesClosedFormAndIsEven)
{
    const Grid g(-4.0, 4.0, 81, 0.5, 2.0, 4);
    const auto s0 = s0_closed_form(g, 1.0);
    EXPECT_NEAR(s0(1, 40), -1.2655121234846454, 1e-15);  // x = 0, t = 1
    for (std::size_t j = 0; j < g.nt(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(s0(j, i), s0(j, g.nx() - 1 - i), 1e-14);
}

TEST(CascadeSource, FirstOrderIsEffectivePotential)
{
    const Grid g(-5.0, 5.0, 51, 0.1, 2.0, 10);
    const auto drift = cosine_drift();
    const auto e = analytic_expansion(drift, 1.0, 0.3, 0, g);
    const auto q = cascade_source(1, drift, 1.0, e);
    for (std::size_t j = 0; j < g.nt(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i)
            EXPECT_EQ(q(j, i), effective_potential_order(drift, 1.0, 1, g.x(i), g.t(j)));
}

TEST(CascadeSource, QuadraticDriftSecondOrder)
{
    const Grid g(-5.0, 5.0, 51, 0.1, 2.0, 10);
    const auto ou = DriftSpec::quadratic_ou();
    const auto q = cascade_source(2, ou, 1.0, analytic_expansion(ou, 1.0, 0.1, 1, g));
    for (std::size_t j = 0; j < g.nt(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(q(j, i), -0.25 * g.x(i) * g.x(i), 1e-14);
}

TEST(CascadeSource, LinearDriftSecondOrder)
{
    const Grid g(-5.0, 5.0, 51, 0.1, 2.0, 10);
    const auto drift = cosine_drift();
    const Modulation& v = *drift.modulation();
    const auto q = cascade_source(2, drift, 1.0, analytic_expansion(drift, 1.0, 0.3, 1, g));
    for (std::size_t j = 0; j < g.nt(); ++j) {
        const double t = g.t(j);
        const double a = v.value(t) - v.integral(t) / t;
        const double expected = 0.25 * a * a - 0.25 * v.value(t) * v.value(t);
        for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(q(j, i), expected, 1e-12);
    }
}

TEST(CascadeSource, NeedsLowerOrders)
{
    const Grid g(-5.0, 5.0, 51, 0.1, 2.0, 10);
    const auto e = analytic_expansion(cosine_drift(), 1.0, 0.3, 1, g);
    EXPECT_THROW(cascade_source(3, cosine_drift(), 1.0, e), std::invalid_argument);
    EXPECT_THROW(cascade_source(0, cosine_drift(), 1.0, e), std::invalid_argument);
}

TEST(AdvanceTerm, ZeroSourceZeroStartStaysZero)
{
    const Grid g(-6.0, 6.0, 121, 0.01, 3.0, 60);
    ScalarField q(g, {Quantity::effective_potential, 1});
    const std::vector<double> init(g.nx(), 0.0);
    const auto s = advance_term(1, q, 1.0, init);
    for (double v : s.values()) EXPECT_EQ(v, 0.0);
}

TEST(AdvanceTerm, ConstantSourceGrowsLinearly)
{
    const Grid g(-6.0, 6.0, 121, 0.01, 3.0, 60);
    ScalarField q(g, {Quantity::effective_potential, 1});
    for (double& v : q.values()) v = 0.5;
    const std::vector<double> init(g.nx(), 0.0);
    const auto s = advance_term(1, q, 1.0, init);
    EXPECT_LE(max_abs_error(s, [&](double, double t) { return 0.5 * (t - g.t0()); }), 1e-8);
}

TEST(AdvanceTerm, LinearDriftFirstOrder)
{
    const Grid g(-10.0, 10.0, 201, 0.01, 5.0, 125);
    const auto drift = cosine_drift();
    const Modulation& v = *drift.modulation();
    const auto q = cascade_source(1, drift, 1.0, analytic_expansion(drift, 1.0, 0.5, 0, g));
    std::vector<double> init(g.nx());
    for (std::size_t i = 0; i < g.nx(); ++i) init[i] = oracles::example1_s1(g.x(i), g.t0(), v);
    const auto s = advance_term(1, q, 1.0, init);
    EXPECT_LE(max_abs_error(s, [&](double x, double t) { return oracles::example1_s1(x, t, v); }), 1e-3);
}

TEST(SolveExpansion, OrderZeroIsLeadingTerm)
{
    const Grid g(-5.0, 5.0, 51, 0.1, 2.0, 10);
    const auto e = solve_expansion(cosine_drift(), 1.0, 0.3, 0, g);
    EXPECT_EQ(e.order(), 0);
    EXPECT_EQ(e.term(0).values()[17], s0_closed_form(g, 1.0).values()[17]);
}

TEST(SolveExpansion, LinearDriftMatchesClosedForms)
{
    const auto drift = cosine_drift();
    const Modulation& v = *drift.modulation();
    const auto e = solve_expansion(drift, 1.0, 0.5, 3, acceptance_grid);
    EXPECT_LE(term_error(e, 1, [&](double x, double t) { return oracles::example1_s1(x, t, v); }), 1e-3);
    EXPECT_LE(term_error(e, 2, [&](double x, double t) { return oracles::example1_s2(x, t, v); }), 1e-3);
    // S_3 vanishes up to a slice constant
    EXPECT_LE(max_abs_about_slice_mean(e.term(3)), 1e-3);
}

TEST(SolveExpansion, QuadraticDriftMatchesClosedForms)
{
    const auto e = solve_expansion(DriftSpec::quadratic_ou(), 1.0, 0.1, 2, acceptance_grid);
    EXPECT_LE(term_error(e, 1, [](double, double t) { return oracles::ou_s1(t, 1.0); }), 1e-8);
    EXPECT_LE(term_error(e, 2, [](double x, double t) { return oracles::ou_s2(x, t, 1.0); }), 1e-8);
}

TEST(SolveExpansion, LinearBoundaryClosureLosesCurvedTerms)
{
    // S_2 of the quadratic drift is quadratic in x, which the linear closure
    // cannot represent at the boundary.
    CascadeOptions linear;
    linear.closure = BoundaryClosure::linear;
    const auto e = solve_expansion(DriftSpec::quadratic_ou(), 1.0, 0.1, 2, acceptance_grid, linear);
    EXPECT_GT(term_error(e, 2, [](double x, double t) { return oracles::ou_s2(x, t, 1.0); }), 1e-2);
}

TEST(SolveExpansion, RejectsOrderAboveCap)
{
    const Grid g(-5.0, 5.0, 51, 0.1, 2.0, 10);
    EXPECT_THROW(solve_expansion(cosine_drift(), 1.0, 0.3, max_expansion_order + 1, g), ConfigError);
    EXPECT_THROW(solve_expansion(cosine_drift(), 1.0, 0.3, -1, g), ConfigError);
    EXPECT_THROW(analytic_expansion(DriftSpec::quadratic_ou(), 1.0, 0.1, 3, g), ConfigError);
}

TEST(SolveExpansion, BoundaryDecayCheckIsOptIn)
{
    const Grid narrow(-2.0, 2.0, 41, 0.01, 5.0, 50);
    EXPECT_NO_THROW(solve_expansion(cosine_drift(), 1.0, 0.3, 1, narrow));
    CascadeOptions strict;
    strict.enforce_boundary_decay = true;
    EXPECT_THROW(solve_expansion(cosine_drift(), 1.0, 0.3, 1, narrow, strict), SolverError);
    EXPECT_GT(solve_expansion(cosine_drift(), 1.0, 0.3, 0, narrow).boundary_ratio(), 1e-12);
}

// Halving dx and dt cuts the S_1 and S_2 errors by about 4.
TEST(SolveExpansion, SecondOrderConvergence)
{
    const auto drift = cosine_drift();
    const Modulation& v = *drift.modulation();
    const Grid coarse(-10.0, 10.0, 401, 0.01, 5.0, 250);
    const Grid fine(-10.0, 10.0, 801, 0.01, 5.0, 499);
    const auto ec = solve_expansion(drift, 1.0, 0.5, 2, coarse);
    const auto ef = solve_expansion(drift, 1.0, 0.5, 2, fine);
    auto s1 = [&](double x, double t) { return oracles::example1_s1(x, t, v); };
    auto s2 = [&](double x, double t) { return oracles::example1_s2(x, t, v); };
    EXPECT_NEAR(term_error(ec, 1, s1) / term_error(ef, 1, s1), 4.0, 0.5);
    EXPECT_NEAR(term_error(ec, 2, s2) / term_error(ef, 2, s2), 4.0, 0.5);
}

TEST(AssembleDensity, AnalyticExpansionReproducesExactDensities)
{
    const Grid wide(-16.0, 16.0, 1601, 0.01, 1.0, 20);
    const auto drift = cosine_drift();
    const auto w = assemble_density(analytic_expansion(drift, 1.0, 0.5, 2, wide), drift);
    EXPECT_LE(max_abs_error(w, [&](double x, double t) {
                  return oracles::example1_density_exact(x, t, 1.0, 0.5, *drift.modulation());
              }),
              1e-12);
    verify_density(w, "w_pert");

    const auto ou = DriftSpec::quadratic_ou();
    const auto wo = assemble_density(analytic_expansion(ou, 1.0, 0.1, 2, wide), ou);
    EXPECT_LE(max_abs_error(wo, [](double x, double t) { return oracles::ou_density_pert(x, t, 1.0, 0.1); }), 1e-12);
}

TEST(AssembleDensity, ZeroStrengthIsHeatKernelBitForBit)
{
    const Grid g(-10.0, 10.0, 201, 0.01, 2.0, 20);
    for (const auto& drift : {cosine_drift(), DriftSpec::quadratic_ou(), DriftSpec::zero()}) {
        const auto w = assemble_density(analytic_expansion(drift, 1.0, 0.0, 2, g), drift, Normalization::none);
        for (std::size_t j = 0; j < g.nt(); ++j)
            for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_EQ(w(j, i), oracles::w0_diffusion(g.x(i), g.t(j), 1.0));
    }
}

TEST(AssembleDensity, NumericAndAnalyticPathsAgree)
{
    const auto ou = DriftSpec::quadratic_ou();
    const auto wa = assemble_density(analytic_expansion(ou, 1.0, 0.1, 2, acceptance_grid), ou);
    const auto wn = assemble_density(solve_expansion(ou, 1.0, 0.1, 2, acceptance_grid), ou);
    double worst = 0.0;
    for (std::size_t k = 0; k < wa.values().size(); ++k)
        worst = std::max(worst, std::abs(wa.values()[k] - wn.values()[k]));
    EXPECT_LE(worst, 1e-10);
}

TEST(AssembleDensity, PositiveWithUnitMass)
{
    const auto drift = DriftSpec::linear_time_modulated(Modulation::sine(2.0));
    const auto w = assemble_density(solve_expansion(drift, 1.0, 0.4, 3, acceptance_grid), drift);
    for (double v : w.values()) EXPECT_GE(v, 0.0);
    for (std::size_t j = 0; j < acceptance_grid.nt(); ++j) EXPECT_NEAR(slice_mass(w, j), 1.0, 1e-12);
}

TEST(CascadeResidual, VanishesForZeroDrift)
{
    const Grid g(-6.0, 6.0, 121, 0.01, 3.0, 60);
    const auto zero = DriftSpec::zero();
    const auto e = solve_expansion(zero, 1.0, 0.5, 2, g);
    EXPECT_EQ(cascade_residual(1, e, zero), 0.0);
    EXPECT_EQ(cascade_residual(2, e, zero), 0.0);
    EXPECT_THROW(cascade_residual(3, e, zero), std::invalid_argument);
}

TEST(CascadeResidual, QuadraticDriftIsBelowTolerance)
{
    const auto ou = DriftSpec::quadratic_ou();
    const auto e = solve_expansion(ou, 1.0, 0.1, 2, acceptance_grid);
    EXPECT_LE(cascade_residual(1, e, ou), 1e-8);
    EXPECT_LE(cascade_residual(2, e, ou), 1e-8);
}

TEST(CascadeResidual, ConvergesAtSecondOrder)
{
    const auto drift = cosine_drift();
    const Grid coarse(-10.0, 10.0, 401, 0.01, 5.0, 250);
    const Grid fine(-10.0, 10.0, 801, 0.01, 5.0, 499);
    const double rc = cascade_residual(1, solve_expansion(drift, 1.0, 0.5, 1, coarse), drift);
    const double rf = cascade_residual(1, solve_expansion(drift, 1.0, 0.5, 1, fine), drift);
    EXPECT_GT(rc / rf, 2.5);
}
