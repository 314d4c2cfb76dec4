/**
 * @file monte_carlo.hpp
 * @brief Euler-Maruyama simulation of dx = -U'(x,t) dt + sqrt(2D) dB and
 *        histogram density estimates from the resulting ensembles.
 *
 * Path p draws every variate from its own std::mt19937_64 seeded with
 * splitmix64(master, p), and normals come from Box-Muller on that stream,
 * so an ensemble is bit-identical for a given seed no matter how the
 * paths are split across threads.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fpp/model.hpp"
#include "fpp/oracles.hpp"

namespace fpp {

struct SampleEnsemble {
    std::vector<double> checkpoints;
    std::vector<std::vector<double>> positions;  // [checkpoint][path]
    std::uint64_t seed = 0;

    std::size_t n_paths() const noexcept { return positions.empty() ? 0 : positions.front().size(); }
};

/// splitmix64 finalizer of master + (path + 1) * golden gamma.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t path) noexcept
{
    std::uint64_t z = master + (path + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Standard normals by Box-Muller; both variates of a pair are used.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

    double next()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

private:
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/**
 * Simulate n_paths trajectories from t0 (positions drawn from the exact
 * Gaussian density at t0) and record them at each checkpoint. Intervals
 * between checkpoints are split into equal steps no longer than dt.
 */
inline SampleEnsemble em_simulate(const DriftSpec& drift, double D, double lambda, double t0,
                                  const std::vector<double>& checkpoints, double dt, std::size_t n_paths,
                                  std::uint64_t seed, unsigned threads = 1)
{
    if (!(dt > 0.0)) throw std::invalid_argument("em_simulate: dt must be > 0");
    if (!(D > 0.0)) throw std::invalid_argument("em_simulate: D must be > 0");
    if (n_paths == 0) throw std::invalid_argument("em_simulate: need at least one path");
    if (checkpoints.empty() || checkpoints.front() < t0 || !std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw std::invalid_argument("em_simulate: checkpoints must be ascending and >= t0");

    struct Leg {
        std::size_t steps;
        double start;
        double h;
    };
    std::vector<Leg> legs;
    double prev = t0;
    for (double tc : checkpoints) {
        const double span = tc - prev;
        const std::size_t steps =
            span > 0.0 ? static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9))) : 0;
        legs.push_back({steps, prev, steps ? span / static_cast<double>(steps) : 0.0});
        prev = tc;
    }

    const auto start = oracles::exact_moments(drift, t0, D, lambda);
    const double start_sd = std::sqrt(start.variance);

    SampleEnsemble out;
    out.checkpoints = checkpoints;
    out.seed = seed;
    out.positions.assign(checkpoints.size(), std::vector<double>(n_paths));

    auto run = [&](std::size_t first, std::size_t last) {
        for (std::size_t p = first; p < last; ++p) {
            NormalStream normal(substream_seed(seed, p));
            double x = start.mean + start_sd * normal.next();
            for (std::size_t c = 0; c < legs.size(); ++c) {
                const Leg& leg = legs[c];
                const double noise = std::sqrt(2.0 * D * leg.h);
                for (std::size_t k = 0; k < leg.steps; ++k) {
                    const double t = leg.start + static_cast<double>(k) * leg.h;
                    x += drift.drift(x, t, lambda) * leg.h + noise * normal.next();
                }
                out.positions[c][p] = x;
            }
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_paths)));
    if (threads == 1) {
        run(0, n_paths);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n_paths + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t first = w * chunk;
            const std::size_t last = std::min(n_paths, first + chunk);
            if (first < last) pool.emplace_back(run, first, last);
        }
    }
    return out;
}

/**
 * Histogram each checkpoint onto the grid's x-nodes (bins of width dx
 * centred on the nodes), scaled by 1 / (n_paths dx). Every checkpoint must
 * coincide with a grid slice; other slices are marked unpopulated.
 */
inline DensityField density_from_samples(const SampleEnsemble& ensemble, const Grid& grid,
                                         double mass_tolerance = 1e-3)
{
    DensityField w(grid, mass_tolerance);
    for (std::size_t j = 0; j < grid.nt(); ++j) w.set_populated(j, false);

    const double dx = grid.dx();
    for (std::size_t c = 0; c < ensemble.checkpoints.size(); ++c) {
        const auto& xs = ensemble.positions.at(c);
        if (xs.empty()) throw std::invalid_argument("density_from_samples: checkpoint " + std::to_string(c) + " is empty");
        const auto j = grid.slice_at(ensemble.checkpoints[c]);
        if (!j) throw std::invalid_argument("density_from_samples: checkpoint time is not a grid slice");
        std::vector<std::size_t> counts(grid.nx(), 0);
        for (double x : xs) {
            const double pos = std::floor((x - grid.x_min()) / dx + 0.5);
            if (pos < 0.0 || pos >= static_cast<double>(grid.nx())) continue;
            ++counts[static_cast<std::size_t>(pos)];
        }
        auto slice = w.slice(*j);
        const double scale = static_cast<double>(xs.size()) * dx;
        for (std::size_t i = 0; i < grid.nx(); ++i) slice[i] = static_cast<double>(counts[i]) / scale;
        w.set_populated(*j, true);
    }
    return w;
}

}  // namespace fpp
