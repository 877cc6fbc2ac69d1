// Command-line front end: run one configuration, sweep an ε family, check the
// structural hypotheses, or recompute diagnostics from stored snapshots.
// Exit codes: 0 success, 2 validation failure, 3 solver abort.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pftg/config.hpp"
#include "pftg/csv.hpp"
#include "pftg/snapshot.hpp"

namespace fs = std::filesystem;
using namespace pftg;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int stride = -1;
};

RunConfig load_config(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty() ? parse_config_text("")
                                             : parse_config(opts.config_path);
    if (const char* env = std::getenv("PFTG_OUT"); env && *env) cfg.out_dir = env;
    if (const char* env = std::getenv("PFTG_THREADS"); env && *env) {
        cfg.threads = std::atoi(env);
        if (cfg.threads < 1) throw ConfigError("PFTG_THREADS must be a positive integer");
    }
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.stride >= 0) cfg.snapshot_stride = opts.stride;
    return cfg;
}

void require_geometry_fits_dim(const RunConfig& cfg) {
    if (cfg.dim == 1 && cfg.geometry != "stripe")
        throw ConfigError("config: key 'geometry' must be stripe when dim = 1");
}

std::string snapshot_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.bin", step);
    return buf;
}

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

int cmd_run(const CommonOpts& opts) {
    const RunConfig cfg = load_config(opts);
    require_geometry_fits_dim(cfg);
    const ModelSpec spec = to_model_spec(cfg);
    const Grid grid = to_grid(cfg, cfg.epsilon);
    const Geometry geo = to_geometry(cfg);
    const Field phi0 = well_prepared_initial(geo, spec, grid);
    const Field sigma0 = initial_nutrient(Sigma0{cfg.sigma0, cfg.sigma0_inside}, phi0);

    const int n_steps = derived_steps(cfg, cfg.epsilon);
    StepConfig step_cfg = to_step_config(cfg);
    step_cfg.dt = cfg.T / n_steps;

    fs::create_directories(cfg.out_dir);
    std::ofstream csv(fs::path(cfg.out_dir) / "trace.csv", std::ios::trunc);
    if (!csv) throw ConfigError("cannot open trace.csv under '" + cfg.out_dir + "'");

    State state = make_initial_state(spec, phi0, sigma0);
    DiagnosticsTrace trace = make_trace(spec, grid);
    append_state(trace, state, spec);
    csv << trace_csv_header() << "\n" << trace_csv_row(trace, 0) << "\n" << std::flush;
    const auto snap = [&](int step) {
        write_snapshot((fs::path(cfg.out_dir) / snapshot_name(step)).string(), state, spec);
    };
    if (cfg.snapshot_stride > 0) snap(0);

    double prev_energy = trace.energy_values.back();
    for (int n = 1; n <= n_steps; ++n) {
        try {
            step(state, spec, step_cfg);
        } catch (const SolverError& e) {
            std::cerr << "solver abort at step " << n << ": " << e.what() << "\n";
            return kExitSolver;
        }
        if (n % cfg.trace_stride == 0 || n == n_steps) {
            append_state(trace, state, spec);
            csv << trace_csv_row(trace, trace.size() - 1) << "\n" << std::flush;
            const double e = trace.energy_values.back();
            if (!std::isfinite(e) || e > step_cfg.blowup_factor * std::max(prev_energy, 1e-12)) {
                std::cerr << "solver abort: energy blow-up at step " << n << "\n";
                return kExitSolver;
            }
            prev_energy = e;
        }
        if ((cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0) || n == n_steps) snap(n);
    }
    std::cout << "run: " << n_steps << " steps, final t = " << csv_number(state.t)
              << ", E = " << csv_number(trace.energy_values.back()) << "\n";
    std::cout << "run: outputs in " << cfg.out_dir << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    const RunConfig cfg = load_config(opts);
    require_geometry_fits_dim(cfg);
    const SweepPlan plan = to_sweep_plan(cfg);
    fs::create_directories(cfg.out_dir);

    SweepReport report;
    try {
        report = run_sweep(plan, cfg.threads);
    } catch (SweepError& e) {
        write_sweep_csv((fs::path(cfg.out_dir) / "sweep_report.csv").string(), e.partial);
        std::cerr << "sweep abort: " << e.what() << "\n";
        std::cerr << "partial report (" << e.partial.rows.size() << " rows) written to "
                  << cfg.out_dir << "\n";
        return kExitSolver;
    }
    write_sweep_csv((fs::path(cfg.out_dir) / "sweep_report.csv").string(), report);
    for (const SweepRow& row : report.rows) {
        const fs::path dir = fs::path(cfg.out_dir) / ("eps_" + short_number(row.epsilon));
        fs::create_directories(dir);
        write_trace_csv((dir / "trace.csv").string(), row.trace);
    }

    std::cout << "sweep: " << report.rows.size() << " runs, E0 = " << csv_number(report.E0)
              << ", c0 = " << csv_number(report.c0) << "\n";
    if (report.precheck) {
        const char* verdict = *report.precheck == TimePrecheck::Ass1Holds    ? "ass1"
                              : *report.precheck == TimePrecheck::Ass2Holds ? "ass2"
                                                                            : "none";
        std::cout << "sweep: global-time precheck = " << verdict;
        if (std::isfinite(report.m0)) std::cout << ", m0 = " << csv_number(report.m0);
        std::cout << "\n";
    }
    std::cout << "sweep: report in " << cfg.out_dir << "/sweep_report.csv\n";
    return 0;
}

int cmd_check(const CommonOpts& opts) {
    const RunConfig cfg = load_config(opts);
    const ModelSpec spec = to_model_spec(cfg);
    const ValidationReport report = check_assumptions(spec);
    bool all_pass = true;
    for (const HypothesisCheck& c : report.checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.id;
        if (!c.detail.empty()) std::cout << ": " << c.detail;
        std::cout << "\n";
        all_pass = all_pass && c.pass;
    }

    if (spec.problem == Problem::P && all_pass) {
        // Informational global-time precheck on the configured initial data.
        try {
            const Grid grid = to_grid(cfg, cfg.epsilon);
            const Field phi0 = well_prepared_initial(to_geometry(cfg), spec, grid);
            const Field sigma0 = initial_nutrient(Sigma0{cfg.sigma0, cfg.sigma0_inside}, phi0);
            const double E0 = energy(phi0, spec) + 0.5 * dot_l2(sigma0, sigma0);
            const double c0 = std::abs(average(phi0));
            const double d0 = std::abs(average(phi0) + average(sigma0));
            const double omega = spec.L_x * spec.L_y;
            const Potential& F = spec.potential;
            const TimePrecheck pre = precheck_global_time(cfg.T, E0, c0, d0, omega, F.c_F,
                                                          F.C_F, spec.proliferation->C_P);
            std::cout << "[INFO] E0 = " << csv_number(E0) << ", c0 = " << csv_number(c0)
                      << "\n";
            if (pre == TimePrecheck::Ass1Holds) {
                std::cout << "[INFO] global-time precheck: ass1 holds, m0 = "
                          << csv_number(mass_confinement_bound(cfg.T, E0, c0, omega, F.c_F,
                                                               F.C_F,
                                                               spec.proliferation->C_P))
                          << "\n";
            } else if (pre == TimePrecheck::Ass2Holds) {
                std::cout << "[INFO] global-time precheck: ass2 holds\n";
            } else {
                std::cout << "[INFO] global-time precheck: no horizon guarantee\n";
            }
        } catch (const std::exception& e) {
            std::cout << "[INFO] global-time precheck skipped: " << e.what() << "\n";
        }
    }

    if (!all_pass) {
        std::cerr << "hypothesis check failed\n";
        return kExitValidation;
    }
    std::cout << "all hypotheses hold\n";
    return 0;
}

int cmd_diag(const CommonOpts& opts, const std::vector<std::string>& paths) {
    const RunConfig base = load_config(opts);
    for (const std::string& path : paths) {
        const Snapshot snap = read_snapshot(path);
        RunConfig cfg = base;
        cfg.epsilon = snap.epsilon;
        cfg.L_x = snap.grid.length_x();
        cfg.L_y = snap.grid.dim == 2 ? snap.grid.length_y() : 1.0;
        const ModelSpec spec = to_model_spec(cfg);
        const State state = to_state(snap);

        std::cout << "snapshot = " << path << "\n";
        std::cout << "t = " << csv_number(snap.t) << "\n";
        std::cout << "epsilon = " << csv_number(snap.epsilon) << "\n";
        std::cout << "grid = " << snap.grid.n_x << " x " << snap.grid.n_y << "\n";
        std::cout << "E = " << csv_number(energy(state.phi, spec)) << "\n";
        std::cout << "half_sigma_l2 = " << csv_number(0.5 * dot_l2(state.sigma, state.sigma))
                  << "\n";
        std::cout << "mass_phi = " << csv_number(average(state.phi)) << "\n";
        std::cout << "mass_sigma = " << csv_number(average(state.sigma)) << "\n";
        std::cout << "disc_pos = " << csv_number(discrepancy_positive(state.phi, spec)) << "\n";
        std::cout << "qc_measure = " << csv_number(qc_measure(state.phi)) << "\n";
        const WTable wtable(spec.potential);
        std::cout << "w_distance = " << csv_number(w_distance_to_limit(state.phi, spec, wtable))
                  << "\n";
        if (snap.grid.dim == 2) {
            try {
                const auto curves = extract_interface(state.phi);
                std::cout << "interface_curves = " << curves.size() << "\n";
                std::cout << "interface_length = " << csv_number(total_interface_length(curves))
                          << "\n";
                std::cout << "median_curvature = " << csv_number(median_curvature(curves))
                          << "\n";
                std::cout << "gt_residual = "
                          << csv_number(gibbs_thomson_residual(curves, state.mu, spec.theta))
                          << "\n";
            } catch (const std::invalid_argument&) {
                std::cout << "interface_curves = 0\n";
            }
        }
        std::cout << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffuse-interface tumour growth: runs, sweeps, checks, diagnostics"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<std::string> diag_paths;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "configuration file");
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_option("--stride", opts.stride, "snapshot stride (overrides config)");
    };
    CLI::App* run = app.add_subcommand("run", "integrate one configuration");
    CLI::App* sweep = app.add_subcommand("sweep", "run a decreasing-epsilon family");
    CLI::App* check = app.add_subcommand("check", "validate the structural hypotheses");
    CLI::App* diag = app.add_subcommand("diag", "recompute diagnostics from snapshots");
    add_common(run);
    add_common(sweep);
    add_common(check);
    add_common(diag);
    diag->add_option("paths", diag_paths, "snapshot files")->expected(-1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opts);
        if (sweep->parsed()) return cmd_sweep(opts);
        if (check->parsed()) return cmd_check(opts);
        if (diag->parsed()) {
            if (diag_paths.empty()) {
                std::cerr << "diag: no snapshot paths given\n";
                return kExitValidation;
            }
            return cmd_diag(opts, diag_paths);
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    } catch (const SnapshotError& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return kExitValidation;
    } catch (const SolverError& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
