#pragma once

// Command-line front end: example1 / ou / custom. Each command runs the
// closed-form and numeric perturbative paths, the finite-difference and
// Monte Carlo references, then writes density.csv and summary.json.
//
// Exit statuses: 0 success, 1 I/O failure, 2 config rejection,
// 3 solver abort, 4 invariant violation at emission.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpp/config_json.hpp"
#include "fpp/fpp.hpp"

namespace fpp::cli {

enum class Command { example1, ou, custom };

enum ExitStatus : int {
    exit_ok = 0,
    exit_io = 1,
    exit_config = 2,
    exit_solver = 3,
    exit_invariant = 4,
};

/// Flag values; unset optionals leave the config untouched.
struct Overrides {
    std::optional<std::string> v;
    std::optional<double> omega;
    std::optional<double> v0;
    std::optional<double> lambda;
    std::optional<std::vector<double>> lambda_sweep;
    std::optional<double> d;
    std::optional<int> order;
    std::optional<double> x_min;
    std::optional<double> x_max;
    std::optional<long long> nx;
    std::optional<long long> nt;
    std::optional<double> t0;
    std::optional<double> t_max;
    std::optional<long long> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> config;
};

inline RunConfig command_defaults(Command cmd)
{
    RunConfig cfg;
    if (cmd == Command::ou) {
        cfg.drift = DriftFamily::quadratic_ou;
        cfg.lambda = 0.1;
    }
    return cfg;
}

/// defaults < config file < flags; the command then pins the drift family.
inline RunConfig resolve_config(Command cmd, const Overrides& o)
{
    RunConfig cfg = command_defaults(cmd);
    if (o.config) cfg = load_config(*o.config, cfg);
    else if (cmd == Command::custom) throw ConfigError("custom: --config is required");

    if (o.v) cfg.v = parse_modulation(*o.v);
    if (o.omega) cfg.omega = *o.omega;
    if (o.v0) cfg.v0 = *o.v0;
    if (o.lambda) cfg.lambda = *o.lambda;
    if (o.lambda_sweep) cfg.lambda_sweep = *o.lambda_sweep;
    if (o.d) cfg.d_coeff = *o.d;
    if (o.order) cfg.order = *o.order;
    if (o.x_min) cfg.x_min = *o.x_min;
    if (o.x_max) cfg.x_max = *o.x_max;
    if (o.nx) cfg.nx = *o.nx;
    if (o.nt) cfg.nt = *o.nt;
    if (o.t0) cfg.t0 = *o.t0;
    if (o.t_max) cfg.t_max = *o.t_max;
    if (o.paths) cfg.paths = *o.paths;
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out_dir = *o.out;

    if (cmd == Command::example1) cfg.drift = DriftFamily::linear_time_modulated;
    if (cmd == Command::ou) cfg.drift = DriftFamily::quadratic_ou;
    return cfg;
}

/// The density columns of the CSV, in header order.
struct Columns {
    std::optional<DensityField> pert;
    std::optional<DensityField> pert_numeric;
    std::optional<DensityField> exact;
    std::optional<DensityField> fd;
    std::optional<DensityField> mc;

    std::vector<std::pair<std::string, const DensityField*>> present() const
    {
        std::vector<std::pair<std::string, const DensityField*>> out;
        auto add = [&](const char* name, const std::optional<DensityField>& f) {
            if (f) out.emplace_back(name, &*f);
        };
        add("w_pert", pert);
        add("w_pert_numeric", pert_numeric);
        add("w_exact", exact);
        add("w_fd", fd);
        add("w_mc", mc);
        return out;
    }
};

struct RunOutput {
    Columns columns;
    nlohmann::ordered_json summary;
};

/// Slice indices at which the Monte Carlo ensemble is recorded.
inline std::vector<std::size_t> checkpoint_slices(const Grid& grid, long long count)
{
    std::vector<std::size_t> out;
    const auto last = static_cast<double>(grid.nt() - 1);
    for (long long k = 1; k <= count; ++k) {
        const auto j = static_cast<std::size_t>(std::llround(static_cast<double>(k) * last / static_cast<double>(count)));
        if (out.empty() || out.back() != j) out.push_back(j);
    }
    return out;
}

namespace detail {

inline nlohmann::ordered_json series(const std::vector<double>& t, const char* key, const std::vector<double>& v)
{
    nlohmann::ordered_json j;
    j["t"] = t;
    j[key] = v;
    return j;
}

}  // namespace detail

inline RunOutput run(const ValidatedConfig& vc)
{
    const RunConfig& cfg = vc.config;
    const Grid& grid = vc.grid;
    const DriftSpec& drift = vc.drift;
    const double D = cfg.d_coeff;
    const double lambda = cfg.lambda;

    RunOutput out;
    Columns& col = out.columns;

    const int limit = oracles::closed_form_order_limit(drift);
    if (limit < 0 || cfg.order <= limit)
        col.pert = assemble_density(analytic_expansion(drift, D, lambda, cfg.order, grid), drift);

    CascadeOptions cascade;
    cascade.boundary_tol = cfg.boundary_tol;
    const ActionExpansion numeric = solve_expansion(drift, D, lambda, cfg.order, grid, cascade);
    col.pert_numeric = assemble_density(numeric, drift);

    col.exact = tabulate_density(
        grid, [&](double x, double t) { return oracles::exact_density(drift, x, t, D, lambda); }, 1e-10);

    FdOptions fd;
    fd.mass_tol = cfg.fd_mass_tol;
    fd.boundary_tol = cfg.boundary_tol;
    fd.step_safety = cfg.fd_step_safety;
    col.fd = fp_fd_solve(drift, D, lambda, grid, col.exact->slice(0), fd);

    const auto checkpoints = checkpoint_slices(grid, cfg.mc_checkpoints);
    std::vector<double> times;
    for (std::size_t j : checkpoints) times.push_back(grid.t(j));
    const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    const SampleEnsemble ensemble = em_simulate(drift, D, lambda, grid.t0(), times, cfg.mc_dt,
                                                static_cast<std::size_t>(cfg.paths), cfg.seed, threads);
    col.mc = density_from_samples(ensemble, grid, cfg.mc_mass_tol);

    const auto present = col.present();
    for (const auto& [name, field] : present) verify_density(*field, name);

    auto& s = out.summary;
    s["config"] = to_json(cfg);

    nlohmann::ordered_json masses;
    for (const auto& [name, field] : present) {
        std::vector<double> t, m;
        for (std::size_t j : field->populated_slices()) {
            t.push_back(grid.t(j));
            m.push_back(slice_mass(*field, j));
        }
        masses[name] = detail::series(t, "mass", m);
    }
    s["masses"] = masses;

    nlohmann::ordered_json moments;
    for (const auto& [name, field] : present) {
        std::vector<double> mean, var;
        for (std::size_t j : checkpoints) {
            const Moments mo = slice_moments(*field, j);
            mean.push_back(mo.mean);
            var.push_back(mo.variance);
        }
        nlohmann::ordered_json entry;
        entry["t"] = times;
        entry["mean"] = mean;
        entry["variance"] = var;
        moments[name] = entry;
    }
    s["moments"] = moments;

    nlohmann::ordered_json distances;
    for (std::size_t a = 0; a < present.size(); ++a) {
        for (std::size_t b = a + 1; b < present.size(); ++b) {
            nlohmann::ordered_json entry;
            bool first = true;
            for (Metric m : {Metric::l1, Metric::linf, Metric::peak_relative_linf}) {
                std::vector<double> t, v;
                for (const auto& d : field_distance(*present[a].second, *present[b].second, m)) {
                    if (std::find(checkpoints.begin(), checkpoints.end(), d.slice) == checkpoints.end()) continue;
                    t.push_back(d.t);
                    v.push_back(d.value);
                }
                if (first) entry["t"] = t;
                first = false;
                entry[std::string(metric_name(m))] = v;
            }
            distances[present[a].first + "|" + present[b].first] = entry;
        }
    }
    s["distances"] = distances;

    if (drift.family() != DriftFamily::quadratic_ou && col.pert) {
        const auto shifted = tabulate_density(
            grid,
            [&](double x, double t) {
                const double vbar = drift.modulation() ? drift.modulation()->integral(t) : 0.0;
                return oracles::w0_diffusion(x + lambda * vbar, t, D);
            },
            1e-10);
        s["translation_residual"] = max_value(field_distance(*col.pert, shifted, Metric::peak_relative_linf));
    } else {
        s["translation_residual"] = nullptr;
    }

    if (drift.family() == DriftFamily::quadratic_ou) {
        const double t_fit = (grid.t0() <= 1.0 && 1.0 <= grid.t_max()) ? 1.0 : grid.t_max();
        std::vector<double> errors, gaps;
        std::vector<std::pair<double, double>> points;
        for (double l : cfg.lambda_sweep) {
            double worst = 0.0, peak = 0.0;
            for (std::size_t i = 0; i < grid.nx(); ++i) {
                const double x = grid.x(i);
                const double exact = oracles::ou_density_exact(x, t_fit, D, l);
                worst = std::max(worst, std::abs(oracles::ou_density_pert(x, t_fit, D, l) - exact));
                peak = std::max(peak, exact);
            }
            errors.push_back(worst / peak);
            points.emplace_back(l, worst / peak);
            gaps.push_back(oracles::log_resummation_gap(l, t_fit));
        }
        nlohmann::ordered_json fit;
        fit["t"] = t_fit;
        fit["lambdas"] = cfg.lambda_sweep;
        fit["errors"] = errors;
        fit["slope"] = points.size() >= 3 ? nlohmann::ordered_json(scaling_order_fit(points)) : nullptr;
        s["scaling_fit"] = fit;
        nlohmann::ordered_json rg;
        rg["t"] = t_fit;
        rg["lambdas"] = cfg.lambda_sweep;
        rg["gaps"] = gaps;
        s["resummation_gaps"] = rg;
    } else {
        s["scaling_fit"] = nullptr;
        s["resummation_gaps"] = nullptr;
    }

    nlohmann::ordered_json cascade_diag;
    std::vector<double> residuals;
    for (int n = 1; n <= numeric.order(); ++n) residuals.push_back(cascade_residual(n, numeric, drift));
    cascade_diag["boundary_ratio"] = numeric.boundary_ratio();
    cascade_diag["residuals"] = residuals;
    s["cascade"] = cascade_diag;
    return out;
}

inline void append_number(std::string& buf, double v)
{
    char tmp[32];
    const int n = std::snprintf(tmp, sizeof tmp, "%.17g", v);
    buf.append(tmp, static_cast<std::size_t>(n));
}

inline void write_csv(const std::filesystem::path& path, const Grid& grid, const Columns& col)
{
    const std::optional<DensityField>* fields[] = {&col.pert, &col.pert_numeric, &col.exact, &col.fd, &col.mc};
    std::string buf = "x,t,w_pert,w_pert_numeric,w_exact,w_fd,w_mc\n";
    buf.reserve(grid.size() * 96);
    for (std::size_t j = 0; j < grid.nt(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            append_number(buf, grid.x(i));
            buf += ',';
            append_number(buf, grid.t(j));
            for (const auto* f : fields) {
                buf += ',';
                if (*f && (*f)->populated(j)) append_number(buf, (**f)(j, i));
            }
            buf += '\n';
        }
    }
    std::ofstream os(path, std::ios::binary);
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw std::ios_base::failure("cannot write " + path.string());
}

inline void write_outputs(const RunConfig& cfg, const Grid& grid, const RunOutput& out)
{
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    write_csv(dir / "density.csv", grid, out.columns);
    std::ofstream js(dir / "summary.json", std::ios::binary);
    js << out.summary.dump(2) << '\n';
    if (!js) throw std::ios_base::failure("cannot write summary.json");
}

inline void add_flags(CLI::App& sub, Overrides& o)
{
    sub.add_option("--v", o.v, "Drift modulation V(t)")->check(CLI::IsMember({"cos", "sin", "const"}));
    sub.add_option("--omega", o.omega, "Angular frequency of V(t)");
    sub.add_option("--v0", o.v0, "Value of a constant V(t)");
    sub.add_option("--lambda", o.lambda, "Drift strength");
    sub.add_option("--lambda-sweep", o.lambda_sweep, "Comma-separated lambdas for the scaling fit")->delimiter(',');
    sub.add_option("--d", o.d, "Diffusion constant D");
    sub.add_option("--order", o.order, "Expansion order N (<= 8)");
    sub.add_option("--x-min", o.x_min, "Left end of the domain");
    sub.add_option("--x-max", o.x_max, "Right end of the domain");
    sub.add_option("--nx", o.nx, "Spatial nodes");
    sub.add_option("--nt", o.nt, "Time slices");
    sub.add_option("--t0", o.t0, "First time slice (> 0)");
    sub.add_option("--t-max", o.t_max, "Last time slice");
    sub.add_option("--paths", o.paths, "Monte Carlo paths");
    sub.add_option("--seed", o.seed, "Monte Carlo master seed");
    sub.add_option("--out", o.out, "Output directory");
    sub.add_option("--config", o.config, "JSON run configuration");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& err = std::cerr)
{
    CLI::App app{"Perturbative Fokker-Planck solver with exact and reference cross-checks"};
    app.require_subcommand(1);
    Overrides o;
    Command cmd = Command::example1;
    auto* ex1 = app.add_subcommand("example1", "Linear drift potential lambda x V(t)");
    auto* ou = app.add_subcommand("ou", "Ornstein-Uhlenbeck drift potential lambda x^2/2");
    auto* custom = app.add_subcommand("custom", "Any built-in drift from a JSON config");
    for (auto* sub : {ex1, ou, custom}) add_flags(*sub, o);
    ex1->callback([&] { cmd = Command::example1; });
    ou->callback([&] { cmd = Command::ou; });
    custom->callback([&] { cmd = Command::custom; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return exit_config;
    }

    try {
        const ValidatedConfig vc = validate_config(resolve_config(cmd, o));
        const RunOutput out = run(vc);
        write_outputs(vc.config, vc.grid, out);
    } catch (const ConfigError& e) {
        err << "config rejected: " << e.what() << '\n';
        return exit_config;
    } catch (const InvariantError& e) {
        err << "invariant violated: " << e.what() << '\n';
        return exit_invariant;
    } catch (const std::ios_base::failure& e) {
        err << "i/o failure: " << e.what() << '\n';
        return exit_io;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "i/o failure: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        err << "solver aborted: " << e.what() << '\n';
        return exit_solver;
    }
    return exit_ok;
}

}  // namespace fpp::cli
