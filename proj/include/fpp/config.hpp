#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fpp/error.hpp"
#include "fpp/model.hpp"

namespace fpp {

/// Highest lambda-order the cascade will carry.
inline constexpr int max_expansion_order = 8;

/// Everything a run needs. Field names are also the JSON keys.
struct RunConfig {
    DriftFamily drift = DriftFamily::linear_time_modulated;
    ModulationKind v = ModulationKind::cosine;
    double omega = 1.0;
    double v0 = 1.0;

    double d_coeff = 1.0;
    double lambda = 0.2;
    std::vector<double> lambda_sweep{0.02, 0.04, 0.08, 0.16};
    int order = 2;

    double x_min = -25.0;
    double x_max = 25.0;
    long long nx = 1001;
    double t0 = 0.01;
    double t_max = 5.0;
    long long nt = 101;

    double fd_mass_tol = 1e-8;
    double boundary_tol = 1e-12;
    double residual_tol = 1e-8;
    double mc_mass_tol = 1e-3;
    double fd_step_safety = 1.0;

    long long paths = 10000;
    std::uint64_t seed = 12345;
    double mc_dt = 1e-3;
    long long mc_checkpoints = 4;

    std::string out_dir = "out";
};

struct ValidatedConfig {
    RunConfig config;
    Grid grid;
    DriftSpec drift;
    double dx;
    double dt;
};

inline DriftSpec make_drift(const RunConfig& cfg)
{
    switch (cfg.drift) {
    case DriftFamily::zero: return DriftSpec::zero();
    case DriftFamily::quadratic_ou: return DriftSpec::quadratic_ou();
    case DriftFamily::linear_time_modulated: break;
    }
    switch (cfg.v) {
    case ModulationKind::cosine: return DriftSpec::linear_time_modulated(Modulation::cosine(cfg.omega));
    case ModulationKind::sine: return DriftSpec::linear_time_modulated(Modulation::sine(cfg.omega));
    case ModulationKind::constant: break;
    }
    return DriftSpec::linear_time_modulated(Modulation::constant(cfg.v0));
}

/**
 * Check every bound of a RunConfig and populate derived quantities.
 * Throws ConfigError naming the first violated bound.
 */
inline ValidatedConfig validate_config(const RunConfig& cfg)
{
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("config: " + what);
    };
    auto positive = [&](double v, const char* name) {
        require(std::isfinite(v) && v > 0.0, std::string(name) + " must be > 0");
    };

    positive(cfg.d_coeff, "d_coeff");
    require(std::isfinite(cfg.lambda), "lambda must be finite");
    require(std::isfinite(cfg.v0), "v0 must be finite");
    require(cfg.order >= 0, "order must be >= 0");
    require(cfg.order <= max_expansion_order,
            "order " + std::to_string(cfg.order) + " exceeds the cap " + std::to_string(max_expansion_order));
    for (double l : cfg.lambda_sweep)
        require(std::isfinite(l) && l > 0.0, "lambda_sweep entries must be > 0");

    require(std::isfinite(cfg.t0) && cfg.t0 > 0.0, "t0 must be > 0 (singular start time)");
    require(cfg.nx >= 3, "nx must be >= 3");
    require(cfg.nt >= 2, "nt must be >= 2");

    positive(cfg.fd_mass_tol, "fd_mass_tol");
    positive(cfg.boundary_tol, "boundary_tol");
    positive(cfg.residual_tol, "residual_tol");
    positive(cfg.mc_mass_tol, "mc_mass_tol");
    positive(cfg.fd_step_safety, "fd_step_safety");
    positive(cfg.mc_dt, "mc_dt");
    require(cfg.paths >= 1, "paths must be >= 1");
    require(cfg.mc_checkpoints >= 1 && cfg.mc_checkpoints <= cfg.nt - 1,
            "mc_checkpoints must lie in [1, nt - 1]");
    require(!cfg.out_dir.empty(), "out_dir must not be empty");

    Grid grid(cfg.x_min, cfg.x_max, static_cast<std::size_t>(cfg.nx), cfg.t0, cfg.t_max,
              static_cast<std::size_t>(cfg.nt));
    DriftSpec drift = make_drift(cfg);
    return ValidatedConfig{cfg, grid, drift, grid.dx(), grid.dt()};
}

}  // namespace fpp
