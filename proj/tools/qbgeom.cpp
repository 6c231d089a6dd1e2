// qbgeom command-line front end: single simulations, parameter sweeps,
// figure-preset datasets, and the validation suite.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.

#include <CLI11.hpp>

#include <cstddef>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "qbgeom/qbgeom.hpp"

namespace {

using namespace qbgeom;

unsigned default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

struct ModelFlags {
    double l_over_lambda0 = 0.25;
    double zeta_over_omega0 = 0.01;
    double lambda_over_gamma = 0.04;
    double omega0_over_gamma = 100.0;
    double t_max = 100.0;
    std::size_t steps = 2001;

    ModelParams resolve() const {
        ModelParams p;
        p.omega0 = omega0_over_gamma;
        p.zeta = zeta_over_omega0 * omega0_over_gamma;
        p.lambda = lambda_over_gamma;
        p.l_over_lambda0 = l_over_lambda0;
        p.t_max = t_max;
        p.n_steps = steps;
        p.validate();
        return p;
    }
};

void add_physics_flags(CLI::App* cmd, ModelFlags& f, bool with_geometry, bool with_grid) {
    if (with_geometry)
        cmd->add_option("--l-over-lambda0", f.l_over_lambda0, "qubit separation l/lambda0");
    cmd->add_option("--zeta-over-omega0", f.zeta_over_omega0, "dipole-dipole coupling as a fraction of omega0");
    cmd->add_option("--lambda-over-gamma", f.lambda_over_gamma, "Lorentzian half-width lambda/gamma")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--omega0-over-gamma", f.omega0_over_gamma, "transition frequency omega0/gamma")
        ->check(CLI::PositiveNumber);
    if (with_grid) {
        cmd->add_option("--t-max", f.t_max, "final time in units of 1/gamma")->check(CLI::PositiveNumber);
        cmd->add_option("--steps", f.steps, "time-grid points")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
    }
}

std::string quote_if_needed(const std::string& s) {
    return s.find(' ') == std::string::npos ? s : "'" + s + "'";
}

struct CommandLine {
    std::string text = "qbgeom";
    CommandLine& arg(const std::string& s) {
        text += ' ';
        text += quote_if_needed(s);
        return *this;
    }
    CommandLine& opt(const char* name, const std::string& v) {
        text += ' ';
        text += name;
        text += ' ';
        text += quote_if_needed(v);
        return *this;
    }
    CommandLine& opt(const char* name, double v) { return opt(name, format_double(v)); }
    CommandLine& opt(const char* name, std::size_t v) { return opt(name, std::to_string(v)); }
};

void command_from_flags(CommandLine& c, const ModelFlags& f, bool with_geometry, bool with_grid) {
    if (with_geometry) c.opt("--l-over-lambda0", f.l_over_lambda0);
    c.opt("--zeta-over-omega0", f.zeta_over_omega0);
    c.opt("--lambda-over-gamma", f.lambda_over_gamma);
    c.opt("--omega0-over-gamma", f.omega0_over_gamma);
    if (with_grid) {
        c.opt("--t-max", f.t_max);
        c.opt("--steps", f.steps);
    }
}

void write_formatted(const std::filesystem::path& out, const std::string& format,
                     const std::string& csv, const nlohmann::ordered_json& json) {
    if (format == "json")
        atomic_write_file(out, json.dump(2) + "\n");
    else
        atomic_write_file(out, csv);
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    ModelFlags model;
    std::string solver = "analytic";
    std::string scheme = "augmented-rk4";
    double dt = 0.01;
    double abs_tol = 1e-6;
    double c1_re = 1.0, c1_im = 0.0, c2_re = 0.0, c2_im = 0.0;
    std::string out = "trajectory.csv";
    std::string format = "csv";
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

int run_simulate(const SimulateOpts& o) {
    const ModelParams p = o.model.resolve();
    const Complex c1_0{o.c1_re, o.c1_im};
    const Complex c2_0{o.c2_re, o.c2_im};

    AmplitudeTrajectory traj;
    if (o.solver == "analytic") {
        traj = propagate_analytic(p, c1_0, c2_0);
    } else {
        IntegratorConfig cfg;
        cfg.scheme = o.scheme == "volterra-trapezoid" ? Scheme::volterra_trapezoid
                                                      : Scheme::augmented_rk4;
        cfg.dt = o.dt;
        cfg.abs_tol = o.abs_tol;
        traj = propagate_numeric(p, c1_0, c2_0, cfg);
        // self-consistency report: the discrete flow must respect the
        // population bound to within the configured tolerance
        const double initial_norm = std::norm(c1_0) + std::norm(c2_0);
        double overshoot = 0.0;
        for (std::size_t k = 0; k < traj.c1.size(); ++k)
            overshoot = std::max(overshoot,
                                 std::norm(traj.c1[k]) + std::norm(traj.c2[k]) - initial_norm);
        std::cout << "self-consistency: max population overshoot " << overshoot
                  << " (abs-tol " << cfg.abs_tol << ")\n";
        if (overshoot > cfg.abs_tol)
            std::cerr << "warning: population bound violated beyond abs-tol; reduce --dt\n";
    }
    const auto series = observables_from(traj, p.omega0);

    RunManifest m = RunManifest::from_params(p);
    m.timestamp = iso8601_now();
    m.solver = o.solver;
    m.seed = o.seed;
    m.workers = o.workers;
    if (o.solver == "numeric") {
        m.scheme = o.scheme;
        m.dt = o.dt;
    }
    CommandLine c;
    c.arg("simulate");
    command_from_flags(c, o.model, true, true);
    c.opt("--solver", o.solver);
    if (o.solver == "numeric") {
        c.opt("--scheme", o.scheme);
        c.opt("--dt", o.dt);
    }
    c.opt("--format", o.format).opt("--out", o.out);
    m.command = c.text;

    write_formatted(o.out, o.format, trajectory_csv(traj, series, p), trajectory_json(traj, series, p));
    write_manifest(o.out, m);
    std::cout << "wrote " << o.out << " (" << traj.t_grid.size() << " points) and "
              << o.out << ".manifest.json\n";
    return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepOpts {
    ModelFlags model;
    std::string mode;
    std::string observable;
    double l_min = 0.0, l_max = 1.0;
    std::size_t l_points = 201;
    double lambda_min = 0.02, lambda_max = 1.0;
    std::size_t lambda_points = 101;
    std::string lambda_spacing = "log";
    double time_max = 250.0;
    std::size_t time_points = 1001;
    double reduce_t_max = 0.0;       // 0: default 100/lambda
    std::size_t reduce_t_points = 0; // 0: frequency rule
    unsigned workers = default_workers();
    std::uint64_t seed = 0;
    std::string out = "sweep.csv";
    std::string format = "csv";
    bool ascii_preview = false;
};

SweepResult run_sweep_result(const SweepOpts& o) {
    ModelParams base = o.model.resolve();
    const GridSpec l_grid{Axis::l_over_lambda0, o.l_min, o.l_max, o.l_points, Spacing::linear};
    if (o.mode == "time-geometry") {
        const GridSpec t_grid{Axis::time, 0.0, o.time_max, o.time_points, Spacing::linear};
        return sweep_time_geometry(base, l_grid, t_grid, observable_from_string(o.observable), o.workers);
    }
    if (o.mode != "geometry-width")
        throw std::domain_error("unknown sweep mode: " + o.mode);
    const GridSpec w_grid{Axis::lambda_over_gamma, o.lambda_min, o.lambda_max, o.lambda_points,
                          o.lambda_spacing == "linear" ? Spacing::linear : Spacing::log};
    TimeSampling ts;
    if (o.reduce_t_max > 0.0) ts.t_max = o.reduce_t_max;
    if (o.reduce_t_points > 0) ts.n_points = o.reduce_t_points;
    return sweep_geometry_width(base, l_grid, w_grid, observable_from_string(o.observable), ts, o.workers);
}

int run_sweep(const SweepOpts& o) {
    SweepResult res = run_sweep_result(o);
    res.manifest.timestamp = iso8601_now();
    res.manifest.seed = o.seed;
    CommandLine c;
    c.arg("sweep").opt("--mode", o.mode).opt("--observable", o.observable);
    command_from_flags(c, o.model, false, false);
    c.opt("--l-min", o.l_min).opt("--l-max", o.l_max).opt("--l-points", o.l_points);
    if (o.mode == "geometry-width") {
        c.opt("--lambda-min", o.lambda_min).opt("--lambda-max", o.lambda_max)
            .opt("--lambda-points", o.lambda_points).opt("--lambda-spacing", o.lambda_spacing);
        if (o.reduce_t_max > 0.0) c.opt("--reduce-t-max", o.reduce_t_max);
        if (o.reduce_t_points > 0) c.opt("--reduce-t-points", o.reduce_t_points);
    } else {
        c.opt("--time-max", o.time_max).opt("--time-points", o.time_points);
    }
    c.opt("--workers", std::size_t{o.workers}).opt("--format", o.format).opt("--out", o.out);
    res.manifest.command = c.text;

    write_formatted(o.out, o.format, matrix_csv(res), matrix_json(res));
    write_manifest(o.out, res.manifest);
    if (o.ascii_preview) std::cout << ascii_heatmap(res);
    std::cout << "wrote " << o.out << " (" << res.rows() << "x" << res.cols() << " "
              << to_string(res.observable) << ") and " << o.out << ".manifest.json\n";
    return 0;
}

// ------------------------------------------------------------------ figure

struct FigureOpts {
    std::string name;
    ModelFlags model; // caption defaults; t_max/steps unused here
    std::size_t l_points = 201;
    std::size_t time_points = 1001;
    std::size_t lambda_points = 101;
    unsigned workers = default_workers();
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    bool ascii_preview = false;
};

// fig3: three labeled series at theta = 0, pi/2, pi/4 (Gamma_a = 0,
// Gamma_s = 0, and the mixed Gamma_s = -i*Gamma_a configuration)
std::string fig3_csv(const std::array<ObservableSeries, 3>& s, const ModelParams& p, bool erg) {
    const char* base = erg ? "ergotropy" : "energy";
    std::string out = "t_gamma,lambda_t,";
    out += std::string(base) + "_theta0," + base + "_thetapi2," + base + "_thetapi4\n";
    for (std::size_t k = 0; k < s[0].t_grid.size(); ++k) {
        out += format_double(s[0].t_grid[k]);
        out += ',';
        out += format_double(p.lambda * s[0].t_grid[k]);
        for (const auto& ser : s) {
            out += ',';
            out += format_double(erg ? ser.ergotropy[k] : ser.energy[k]);
        }
        out += '\n';
    }
    return out;
}

int run_figure(const FigureOpts& o) {
    const std::string out = o.out.empty() ? o.name + ".csv" : o.out;
    ModelFlags flags = o.model;
    flags.t_max = 250.0; // lambda*t up to 10 at the caption width
    flags.steps = o.time_points;

    CommandLine c;
    c.arg("figure").arg(o.name);
    c.opt("--zeta-over-omega0", flags.zeta_over_omega0);
    c.opt("--lambda-over-gamma", flags.lambda_over_gamma);
    c.opt("--omega0-over-gamma", flags.omega0_over_gamma);
    c.opt("--workers", std::size_t{o.workers}).opt("--format", o.format).opt("--out", out);

    if (o.name == "fig2a" || o.name == "fig2b") {
        const ModelParams base = flags.resolve();
        const GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, o.l_points, Spacing::linear};
        const GridSpec tg{Axis::time, 0.0, flags.t_max, o.time_points, Spacing::linear};
        const auto obs = o.name == "fig2a" ? Observable::energy : Observable::ergotropy;
        auto res = sweep_time_geometry(base, lg, tg, obs, o.workers);
        res.manifest.timestamp = iso8601_now();
        res.manifest.seed = o.seed;
        res.manifest.command = c.text;
        write_formatted(out, o.format, matrix_csv(res), matrix_json(res));
        write_manifest(out, res.manifest);
        if (o.ascii_preview) std::cout << ascii_heatmap(res);
    } else if (o.name == "fig3a" || o.name == "fig3b") {
        flags.steps = std::max<std::size_t>(o.time_points, 5001);
        std::array<ObservableSeries, 3> series;
        const std::array<double, 3> ls{0.0, 0.25, 0.125}; // theta = 0, pi/2, pi/4
        ModelParams base = flags.resolve();
        for (std::size_t i = 0; i < 3; ++i) {
            ModelParams p = base;
            p.l_over_lambda0 = ls[i];
            series[i] = observables_from(propagate_analytic(p), p.omega0);
        }
        RunManifest m = RunManifest::from_params(base);
        m.timestamp = iso8601_now();
        m.solver = "analytic";
        m.seed = o.seed;
        m.observable = o.name == "fig3a" ? "energy" : "ergotropy";
        m.command = c.text;
        const bool erg = o.name == "fig3b";
        if (o.format == "json") {
            nlohmann::ordered_json j;
            j["t_gamma"] = series[0].t_grid;
            const char* names[3] = {"theta0", "thetapi2", "thetapi4"};
            for (std::size_t i = 0; i < 3; ++i)
                j[names[i]] = erg ? series[i].ergotropy : series[i].energy;
            atomic_write_file(out, j.dump(2) + "\n");
        } else {
            atomic_write_file(out, fig3_csv(series, base, erg));
        }
        write_manifest(out, m);
        if (o.ascii_preview) {
            SweepResult preview;
            preview.row_axis = GridSpec{Axis::l_over_lambda0, 0.0, 0.25, 3, Spacing::linear};
            preview.col_axis = GridSpec{Axis::time, 0.0, base.t_max, base.n_steps, Spacing::linear};
            preview.observable = erg ? Observable::ergotropy : Observable::energy;
            const std::array<std::size_t, 3> order{0, 2, 1}; // rows by l: 0, 0.125, 0.25
            for (std::size_t r : order) {
                const auto& v = erg ? series[r].ergotropy : series[r].energy;
                preview.values.insert(preview.values.end(), v.begin(), v.end());
            }
            std::cout << ascii_heatmap(preview);
        }
    } else if (o.name == "fig4a" || o.name == "fig4b" || o.name == "fig4c") {
        const ModelParams base = flags.resolve();
        const GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, o.l_points, Spacing::linear};
        const GridSpec wg{Axis::lambda_over_gamma, 0.02, 1.0, o.lambda_points, Spacing::log};
        const auto obs = o.name == "fig4a"   ? Observable::max_energy
                         : o.name == "fig4b" ? Observable::max_power
                                             : Observable::max_ergotropy;
        auto res = sweep_geometry_width(base, lg, wg, obs, {}, o.workers);
        res.manifest.timestamp = iso8601_now();
        res.manifest.seed = o.seed;
        res.manifest.command = c.text;
        write_formatted(out, o.format, matrix_csv(res), matrix_json(res));
        write_manifest(out, res.manifest);
        if (o.ascii_preview) std::cout << ascii_heatmap(res);
    } else {
        throw std::domain_error("unknown figure name: " + o.name);
    }
    std::cout << "wrote " << out << " and " << out << ".manifest.json\n";
    return 0;
}

// ---------------------------------------------------------------- validate

struct ValidateOpts {
    std::uint64_t seed = 42;
    std::size_t sets = 20;
    double oracle_t_max = 2500.0;
    double oracle_dt = 0.005;
    unsigned workers = default_workers();
    std::string out;
    bool inject = false;
};

int run_validate(const ValidateOpts& o) {
    ValidationOptions opt;
    opt.seed = o.seed;
    opt.oracle_sets = o.sets;
    opt.oracle_t_max = o.oracle_t_max;
    opt.oracle_dt = o.oracle_dt;
    opt.workers = o.workers;
    opt.inject_delta_sign_error = o.inject;
    const auto report = run_validation(opt);
    std::cout << report_text(report);
    if (!o.out.empty()) {
        atomic_write_file(o.out, report_json(report).dump(2) + "\n");
        std::cout << "wrote " << o.out << "\n";
    }
    return report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometry-controlled two-qubit battery simulator (gamma = 1 units)"};
    app.set_version_flag("--version", std::string("qbgeom ") + qbgeom::version);
    app.set_config("--config", "", "key = value configuration file")->envname("QBGEOM_CONFIG");
    app.require_subcommand(0, 1);

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "propagate one parameter set and export the trajectory");
    add_physics_flags(simulate, sim.model, true, true);
    simulate->add_option("--solver", sim.solver, "analytic | numeric")
        ->check(CLI::IsMember({"analytic", "numeric"}));
    simulate->add_option("--scheme", sim.scheme, "numeric scheme")
        ->check(CLI::IsMember({"augmented-rk4", "volterra-trapezoid"}));
    simulate->add_option("--dt", sim.dt, "numeric integrator step bound")->check(CLI::PositiveNumber);
    simulate->add_option("--abs-tol", sim.abs_tol, "self-consistency reporting tolerance")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed, "recorded in the manifest (runs are deterministic)");
    simulate->add_option("--workers", sim.workers, "recorded in the manifest (single trajectory)");
    simulate->add_option("--c1-re", sim.c1_re, "initial charger amplitude, real part");
    simulate->add_option("--c1-im", sim.c1_im, "initial charger amplitude, imaginary part");
    simulate->add_option("--c2-re", sim.c2_re, "initial battery amplitude, real part");
    simulate->add_option("--c2-im", sim.c2_im, "initial battery amplitude, imaginary part");
    simulate->add_option("--out", sim.out, "output path");
    simulate->add_option("--format", sim.format)->check(CLI::IsMember({"csv", "json"}));

    SweepOpts sw;
    auto* sweep = app.add_subcommand("sweep", "evaluate an observable over a 2-D parameter grid");
    sweep->add_option("--mode", sw.mode, "time-geometry | geometry-width")->required()
        ->check(CLI::IsMember({"time-geometry", "geometry-width"}));
    sweep->add_option("--observable", sw.observable,
                      "energy | ergotropy | power | max_energy | max_ergotropy | max_power")
        ->required();
    add_physics_flags(sweep, sw.model, false, false);
    sweep->add_option("--l-min", sw.l_min);
    sweep->add_option("--l-max", sw.l_max);
    sweep->add_option("--l-points", sw.l_points)->check(CLI::PositiveNumber);
    sweep->add_option("--lambda-min", sw.lambda_min)->check(CLI::PositiveNumber);
    sweep->add_option("--lambda-max", sw.lambda_max)->check(CLI::PositiveNumber);
    sweep->add_option("--lambda-points", sw.lambda_points)->check(CLI::PositiveNumber);
    sweep->add_option("--lambda-spacing", sw.lambda_spacing)->check(CLI::IsMember({"log", "linear"}));
    sweep->add_option("--time-max", sw.time_max)->check(CLI::PositiveNumber);
    sweep->add_option("--time-points", sw.time_points)->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
    sweep->add_option("--reduce-t-max", sw.reduce_t_max, "reduction horizon override (default 100/lambda)");
    sweep->add_option("--reduce-t-points", sw.reduce_t_points, "reduction grid points override");
    sweep->add_option("--workers", sw.workers)->check(CLI::PositiveNumber);
    sweep->add_option("--seed", sw.seed, "recorded in the manifest (sweeps are deterministic)");
    sweep->add_option("--out", sw.out, "output path");
    sweep->add_option("--format", sw.format)->check(CLI::IsMember({"csv", "json"}));
    sweep->add_flag("--ascii-preview", sw.ascii_preview, "print a coarse character heatmap");

    FigureOpts fig;
    auto* figure = app.add_subcommand("figure", "emit a plot-ready preset dataset");
    figure->add_option("name", fig.name, "fig2a fig2b fig3a fig3b fig4a fig4b fig4c")->required();
    add_physics_flags(figure, fig.model, false, false);
    figure->add_option("--l-points", fig.l_points)->check(CLI::PositiveNumber);
    figure->add_option("--time-points", fig.time_points)->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
    figure->add_option("--lambda-points", fig.lambda_points)->check(CLI::PositiveNumber);
    figure->add_option("--workers", fig.workers)->check(CLI::PositiveNumber);
    figure->add_option("--seed", fig.seed, "recorded in the manifest (figures are deterministic)");
    figure->add_option("--out", fig.out, "output path (default <name>.csv)");
    figure->add_option("--format", fig.format)->check(CLI::IsMember({"csv", "json"}));
    figure->add_flag("--ascii-preview", fig.ascii_preview, "print a coarse character heatmap");

    ValidateOpts val;
    auto* validate = app.add_subcommand("validate", "run the invariant suite over a seeded ensemble");
    validate->add_option("--seed", val.seed);
    validate->add_option("--sets", val.sets, "random parameter sets for the solver cross-check");
    validate->add_option("--oracle-t-max", val.oracle_t_max)->check(CLI::PositiveNumber);
    validate->add_option("--oracle-dt", val.oracle_dt)->check(CLI::PositiveNumber);
    validate->add_option("--workers", val.workers)->check(CLI::PositiveNumber);
    validate->add_option("--out", val.out, "write the JSON report here");
    validate->add_flag("--inject-delta-sign-error", val.inject)->group(""); // test-harness hook

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(simulate)) return run_simulate(sim);
        if (app.got_subcommand(sweep)) return run_sweep(sw);
        if (app.got_subcommand(figure)) return run_figure(fig);
        if (app.got_subcommand(validate)) return run_validate(val);
        std::cout << app.help();
        return 2;
    } catch (const qbgeom::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const qbgeom::StabilityError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
