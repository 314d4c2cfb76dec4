#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "fpp/analysis.hpp"
#include "fpp/oracles.hpp"
#include "fpp/reference/fd_solver.hpp"
#include "fpp/reference/monte_carlo.hpp"

using namespace fpp;

namespace {

// dx = 0.02, wide enough that every case below stays clear of the ends.
const Grid fd_grid(-16.0, 16.0, 1601, 0.01, 1.0, 100);
// dx = 0.25, same time axis as fd_grid.
const Grid mc_grid(-10.0, 10.0, 81, 0.01, 1.0, 100);

DriftSpec cosine_drift() { return DriftSpec::linear_time_modulated(Modulation::cosine(1.0)); }

std::vector<double> exact_slice(const DriftSpec& drift, double lambda, const Grid& g, std::size_t j)
{
    std::vector<double> out(g.nx());
    for (std::size_t i = 0; i < g.nx(); ++i) out[i] = oracles::exact_density(drift, g.x(i), g.t(j), 1.0, lambda);
    return out;
}

double worst_l1_vs_exact(const DensityField& w, const DriftSpec& drift, double lambda)
{
    const auto exact = tabulate_density(
        w.grid(), [&](double x, double t) { return oracles::exact_density(drift, x, t, 1.0, lambda); },
        std::numeric_limits<double>::infinity());
    return max_value(field_distance(w, exact, Metric::l1));
}

std::vector<double> mc_checkpoints(const Grid& g)
{
    return {g.t(g.nt() / 4), g.t(g.nt() / 2), g.t(g.nt() - 1)};
}

}  // namespace

TEST(FdSolver, WienerMatchesHeatKernel)
{
    const auto zero = DriftSpec::zero();
    const auto w = fp_fd_solve(zero, 1.0, 0.0, fd_grid, exact_slice(zero, 0.0, fd_grid, 0));
    const auto exact = tabulate_density(
        fd_grid, [](double x, double t) { return oracles::w0_diffusion(x, t, 1.0); }, 1e-10);
    // the narrow early slices are the least resolved
    EXPECT_LE(field_distance(w, exact, Metric::l1).back().value, 1e-4);
    EXPECT_LE(worst_l1_vs_exact(w, zero, 0.0), 1e-3);
}

TEST(FdSolver, LinearDriftMatchesTranslatedKernel)
{
    const auto drift = cosine_drift();
    const auto w = fp_fd_solve(drift, 1.0, 0.5, fd_grid, exact_slice(drift, 0.5, fd_grid, 0));
    EXPECT_LE(worst_l1_vs_exact(w, drift, 0.5), 1e-3);
}

TEST(FdSolver, QuadraticDriftMatchesExact)
{
    const auto ou = DriftSpec::quadratic_ou();
    const auto w = fp_fd_solve(ou, 1.0, 0.1, fd_grid, exact_slice(ou, 0.1, fd_grid, 0));
    EXPECT_LE(worst_l1_vs_exact(w, ou, 0.1), 1e-3);
}

TEST(FdSolver, ConservesMass)
{
    const auto drift = DriftSpec::linear_time_modulated(Modulation::sine(2.0));
    const auto w = fp_fd_solve(drift, 1.0, 0.4, fd_grid, exact_slice(drift, 0.4, fd_grid, 0));
    for (std::size_t j = 0; j < fd_grid.nt(); ++j) EXPECT_NEAR(slice_mass(w, j), 1.0, 1e-8);
    verify_density(w, "w_fd");
}

TEST(FdSolver, ReportsBoundaryLeak)
{
    const Grid narrow(-3.0, 3.0, 301, 0.01, 5.0, 50);
    const auto zero = DriftSpec::zero();
    try {
        fp_fd_solve(zero, 1.0, 0.0, narrow, exact_slice(zero, 0.0, narrow, 0));
        FAIL() << "expected a boundary error";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    }
}

TEST(FdSolver, RejectsBadInitialSlices)
{
    const auto zero = DriftSpec::zero();
    auto init = exact_slice(zero, 0.0, fd_grid, 0);
    auto half = init;
    for (double& v : half) v *= 0.5;
    EXPECT_THROW(fp_fd_solve(zero, 1.0, 0.0, fd_grid, half), std::invalid_argument);
    auto negative = init;
    negative[10] = -1e-6;
    EXPECT_THROW(fp_fd_solve(zero, 1.0, 0.0, fd_grid, negative), std::invalid_argument);
    EXPECT_THROW(fp_fd_solve(zero, 1.0, 0.0, fd_grid, std::span(init).first(10)), std::invalid_argument);
}

TEST(FdSolver, SubstepsFollowDiffusionLimit)
{
    EXPECT_EQ(fd_substeps(fd_grid, 1.0, {}), 50u);
    FdOptions fixed;
    fixed.substeps = 3;
    EXPECT_EQ(fd_substeps(fd_grid, 1.0, fixed), 3u);
}

TEST(MonteCarlo, VarianceWithinSamplingError)
{
    const auto ou = DriftSpec::quadratic_ou();
    const std::size_t n = 20000;
    const auto ens = em_simulate(ou, 1.0, 0.1, 0.01, {1.0}, 1e-3, n, 4242);
    const auto& xs = ens.positions[0];
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    const double exact = oracles::ou_variance(1.0, 1.0, 0.1);
    EXPECT_NEAR(var, exact, 3.0 * exact * std::sqrt(2.0 / static_cast<double>(n)));
    EXPECT_NEAR(mean, 0.0, 3.0 * std::sqrt(exact / static_cast<double>(n)));
}

TEST(MonteCarlo, DeterministicForSeedAndThreadCount)
{
    const auto drift = cosine_drift();
    const auto a = em_simulate(drift, 1.0, 0.5, 0.01, {0.5, 1.0}, 1e-2, 500, 7);
    const auto b = em_simulate(drift, 1.0, 0.5, 0.01, {0.5, 1.0}, 1e-2, 500, 7);
    const auto c = em_simulate(drift, 1.0, 0.5, 0.01, {0.5, 1.0}, 1e-2, 500, 7, 3);
    const auto d = em_simulate(drift, 1.0, 0.5, 0.01, {0.5, 1.0}, 1e-2, 500, 8);
    EXPECT_EQ(a.positions, b.positions);
    EXPECT_EQ(a.positions, c.positions);
    EXPECT_NE(a.positions, d.positions);
}

TEST(MonteCarlo, ZeroStrengthMatchesWienerEnsemble)
{
    const auto a = em_simulate(cosine_drift(), 1.0, 0.0, 0.01, {1.0}, 1e-2, 300, 3);
    const auto b = em_simulate(DriftSpec::zero(), 1.0, 0.0, 0.01, {1.0}, 1e-2, 300, 3);
    EXPECT_EQ(a.positions, b.positions);
}

TEST(MonteCarlo, RejectsBadArguments)
{
    const auto zero = DriftSpec::zero();
    EXPECT_THROW(em_simulate(zero, 1.0, 0.0, 0.01, {1.0}, 0.0, 10, 1), std::invalid_argument);
    EXPECT_THROW(em_simulate(zero, 1.0, 0.0, 0.01, {1.0}, 1e-2, 0, 1), std::invalid_argument);
    EXPECT_THROW(em_simulate(zero, 1.0, 0.0, 0.5, {0.1}, 1e-2, 10, 1), std::invalid_argument);
}

TEST(Histogram, SinglePointIsOneBinSpike)
{
    SampleEnsemble ens;
    ens.checkpoints = {mc_grid.t(50)};
    ens.positions = {std::vector<double>(1000, 1.0)};
    const auto w = density_from_samples(ens, mc_grid);
    const std::size_t node = 44;  // x = 1.0
    ASSERT_DOUBLE_EQ(mc_grid.x(node), 1.0);
    for (std::size_t i = 0; i < mc_grid.nx(); ++i) EXPECT_EQ(w(50, i), i == node ? 1.0 / mc_grid.dx() : 0.0);
    EXPECT_TRUE(w.populated(50));
    EXPECT_FALSE(w.populated(49));
}

TEST(Histogram, RejectsMisalignedOrEmptyCheckpoints)
{
    SampleEnsemble ens;
    ens.checkpoints = {0.5 * (mc_grid.t(3) + mc_grid.t(4))};
    ens.positions = {std::vector<double>(10, 0.0)};
    EXPECT_THROW(density_from_samples(ens, mc_grid), std::invalid_argument);
    ens.checkpoints = {mc_grid.t(3)};
    ens.positions = {{}};
    EXPECT_THROW(density_from_samples(ens, mc_grid), std::invalid_argument);
}

TEST(Histogram, CloseToExactDensity)
{
    const auto drift = cosine_drift();
    const auto ens = em_simulate(drift, 1.0, 0.5, mc_grid.t0(), mc_checkpoints(mc_grid), 1e-3, 100000, 12345);
    const auto w = density_from_samples(ens, mc_grid);
    verify_density(w, "w_mc");
    EXPECT_LE(worst_l1_vs_exact(w, drift, 0.5), 0.02);
}

// Euler-Maruyama is exact for the Wiener process, so what is left is
// sampling noise: four times the paths should halve the L1 distance.
TEST(Histogram, SamplingErrorShrinksAsRootN)
{
    const Grid g(-10.0, 10.0, 101, 0.01, 1.0, 2);
    const auto zero = DriftSpec::zero();
    auto mean_l1 = [&](std::size_t n) {
        double total = 0.0;
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            const auto w = density_from_samples(em_simulate(zero, 1.0, 0.0, g.t0(), {1.0}, 1.0, n, seed), g);
            total += worst_l1_vs_exact(w, zero, 0.0);
        }
        return total / 6.0;
    };
    const double ratio = mean_l1(10000) / mean_l1(40000);
    EXPECT_GT(ratio, 1.6);
    EXPECT_LT(ratio, 2.4);
}

TEST(References, FdAndMonteCarloAgree)
{
    const auto ou = DriftSpec::quadratic_ou();
    const auto fd = fp_fd_solve(ou, 1.0, 0.1, fd_grid, exact_slice(ou, 0.1, fd_grid, 0));
    const auto mc = density_from_samples(
        em_simulate(ou, 1.0, 0.1, mc_grid.t0(), mc_checkpoints(mc_grid), 1e-3, 100000, 99), mc_grid);
    EXPECT_LE(max_value(field_distance(resample(fd, mc_grid), mc, Metric::l1)), 0.03);
}
