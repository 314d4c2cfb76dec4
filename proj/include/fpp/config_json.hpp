#pragma once

// JSON form of RunConfig: a flat object whose keys are the RunConfig field
// names. Unknown keys and type mismatches are ConfigErrors.

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "fpp/config.hpp"

namespace fpp {

inline std::string modulation_name(ModulationKind kind)
{
    switch (kind) {
    case ModulationKind::cosine: return "cos";
    case ModulationKind::sine: return "sin";
    case ModulationKind::constant: break;
    }
    return "const";
}

inline ModulationKind parse_modulation(const std::string& name)
{
    if (name == "cos") return ModulationKind::cosine;
    if (name == "sin") return ModulationKind::sine;
    if (name == "const") return ModulationKind::constant;
    throw ConfigError("config: unknown modulation '" + name + "' (expected cos|sin|const)");
}

inline DriftFamily parse_drift_family(const std::string& name)
{
    if (name == "zero") return DriftFamily::zero;
    if (name == "linear_time_modulated") return DriftFamily::linear_time_modulated;
    if (name == "quadratic_ou") return DriftFamily::quadratic_ou;
    throw ConfigError("config: unknown drift family '" + name + "'");
}

inline nlohmann::ordered_json to_json(const RunConfig& c)
{
    nlohmann::ordered_json j;
    j["drift"] = to_string(c.drift);
    j["v"] = modulation_name(c.v);
    j["omega"] = c.omega;
    j["v0"] = c.v0;
    j["d_coeff"] = c.d_coeff;
    j["lambda"] = c.lambda;
    j["lambda_sweep"] = c.lambda_sweep;
    j["order"] = c.order;
    j["x_min"] = c.x_min;
    j["x_max"] = c.x_max;
    j["nx"] = c.nx;
    j["t0"] = c.t0;
    j["t_max"] = c.t_max;
    j["nt"] = c.nt;
    j["fd_mass_tol"] = c.fd_mass_tol;
    j["boundary_tol"] = c.boundary_tol;
    j["residual_tol"] = c.residual_tol;
    j["mc_mass_tol"] = c.mc_mass_tol;
    j["fd_step_safety"] = c.fd_step_safety;
    j["paths"] = c.paths;
    j["seed"] = c.seed;
    j["mc_dt"] = c.mc_dt;
    j["mc_checkpoints"] = c.mc_checkpoints;
    j["out_dir"] = c.out_dir;
    return j;
}

/// Overlay the keys present in `j` onto `base`.
inline RunConfig merge_json(RunConfig base, const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("config: top-level JSON value must be an object");

    static const std::set<std::string> known = {
        "drift",       "v",           "omega",        "v0",          "d_coeff",        "lambda",
        "lambda_sweep", "order",      "x_min",        "x_max",       "nx",             "t0",
        "t_max",       "nt",          "fd_mass_tol",  "boundary_tol", "residual_tol",  "mc_mass_tol",
        "fd_step_safety", "paths",    "seed",         "mc_dt",       "mc_checkpoints", "out_dir"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");

    auto read = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
        }
    };

    if (j.contains("drift")) {
        std::string name;
        read("drift", name);
        base.drift = parse_drift_family(name);
    }
    if (j.contains("v")) {
        std::string name;
        read("v", name);
        base.v = parse_modulation(name);
    }
    read("omega", base.omega);
    read("v0", base.v0);
    read("d_coeff", base.d_coeff);
    read("lambda", base.lambda);
    read("lambda_sweep", base.lambda_sweep);
    read("order", base.order);
    read("x_min", base.x_min);
    read("x_max", base.x_max);
    read("nx", base.nx);
    read("t0", base.t0);
    read("t_max", base.t_max);
    read("nt", base.nt);
    read("fd_mass_tol", base.fd_mass_tol);
    read("boundary_tol", base.boundary_tol);
    read("residual_tol", base.residual_tol);
    read("mc_mass_tol", base.mc_mass_tol);
    read("fd_step_safety", base.fd_step_safety);
    read("paths", base.paths);
    read("seed", base.seed);
    read("mc_dt", base.mc_dt);
    read("mc_checkpoints", base.mc_checkpoints);
    read("out_dir", base.out_dir);
    return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {})
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return merge_json(std::move(base), j);
}

}  // namespace fpp
