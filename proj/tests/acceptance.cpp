// Acceptance gate: twelve end-to-end criteria covering the oracle constants,
// the structural conservation laws, the energy balance, the uniform bounds,
// the sharp-interface functionals and the command-line contract.  One line per
// criterion; the process exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pftg/config.hpp"
#include "pftg/csv.hpp"

namespace fs = std::filesystem;
using namespace pftg;

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Result {
    bool pass = false;
    std::string detail;
};

template <typename F>
Result guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return {false, std::string("exception: ") + e.what()};
    }
}

// ---------------------------------------------------------------------------
// Shared runs

// Criteria 2/3/5 share two 128x128 runs of 500 steps at eps = 0.04.
struct ConservationRuns {
    double p_drift = 0.0;         // max |[phi + sigma](t) - [phi + sigma](0)|
    double h_rise = 0.0;          // max increase of [phi] between records
    double h_rate = 0.0;          // max decrement rate of [phi]
    double h_sigma_lo = 1.0, h_sigma_hi = 0.0;
    double bound_ratio = 0.0;     // max over both runs of ||
                                  // |phi|-1 ||_2 / sqrt(eps E / cbar_F)
};

ConservationRuns shared_conservation_runs() {
    ConservationRuns out;
    const double eps = 0.04, dt = 0.5 * eps * eps * eps;
    const int n = 128, n_steps = 500;
    const Grid g = make_grid_2d(n, n, 1.0, 1.0);
    const Geometry geo = circle_geometry(0.5, 0.5, 0.25);

    const auto bound_check = [&](const State& st, const ModelSpec& spec) {
        double s = 0.0;
        for (double v : st.phi.values) {
            const double d = std::abs(v) - 1.0;
            s += d * d;
        }
        const double lhs = std::sqrt(s * g.cell_measure());
        const double rhs =
            std::sqrt(spec.epsilon * energy(st.phi, spec) / spec.potential.cbar_F);
        out.bound_ratio = std::max(out.bound_ratio, lhs / rhs);
    };

    {
        const ModelSpec spec =
            make_model_spec(Problem::P, quartic_double_well(), linear_proliferation(0.5),
                            std::nullopt, eps, 1.0, 1.0, dt * n_steps);
        const Field phi0 = well_prepared_initial(geo, spec, g);
        StepConfig cfg;
        cfg.dt = dt;
        const auto obs = [&](int, const State& st) { bound_check(st, spec); };
        const State init = make_initial_state(spec, phi0, constant_field(g, 0.8));
        bound_check(init, spec);
        const Trajectory tr = run(init, spec, cfg, n_steps, 5, obs, 25);
        const double sum0 = tr.trace.mass_sum.front();
        for (double m : tr.trace.mass_sum)
            out.p_drift = std::max(out.p_drift, std::abs(m - sum0));
        bound_check(tr.state, spec);
    }
    {
        const ModelSpec spec =
            make_model_spec(Problem::H, quartic_double_well(), std::nullopt,
                            smooth_interpolation(), eps, 1.0, 1.0, dt * n_steps);
        const Field phi0 = well_prepared_initial(geo, spec, g);
        StepConfig cfg;
        cfg.dt = dt;
        const auto obs = [&](int, const State& st) {
            bound_check(st, spec);
            for (double v : st.sigma.values) {
                out.h_sigma_lo = std::min(out.h_sigma_lo, v);
                out.h_sigma_hi = std::max(out.h_sigma_hi, v);
            }
        };
        const State init = make_initial_state(spec, phi0, constant_field(g, 0.8));
        bound_check(init, spec);
        const Trajectory tr = run(init, spec, cfg, n_steps, 5, obs, 25);
        for (std::size_t i = 0; i + 1 < tr.trace.size(); ++i) {
            out.h_rise =
                std::max(out.h_rise, tr.trace.mass_phi[i + 1] - tr.trace.mass_phi[i]);
            out.h_rate = std::max(out.h_rate,
                                  (tr.trace.mass_phi[i] - tr.trace.mass_phi[i + 1]) /
                                      (tr.trace.times[i + 1] - tr.trace.times[i]));
        }
        bound_check(tr.state, spec);
    }
    return out;
}

// Criteria 6-9 share source-free droplet relaxations: measure the
// concentration ratio, discrepancy and w-distance at t1, then continue to the
// Gibbs-Thomson plateau at t2.
struct DropletRun {
    double ratio_t1 = 0.0;     // E / (2 theta length)
    double max_disc_t1 = 0.0;  // max over [0, t1] of disc+ / E
    double w_t1 = 0.0;
    double gt_t2 = std::numeric_limits<double>::quiet_NaN();
};

DropletRun droplet_relaxation(double eps, const WTable& wtable, bool extend) {
    const double t1 = 4e-3, t2 = 1.2e-2;
    const ModelSpec spec =
        make_model_spec(Problem::P, quartic_double_well(), linear_proliferation(0.0),
                        std::nullopt, eps, 1.0, 1.0, t2);
    const int n = static_cast<int>(std::ceil(6.0 / eps));
    const Grid g = make_grid_2d(n, n, 1.0, 1.0);
    const Field phi0 = well_prepared_initial(circle_geometry(0.5, 0.5, 0.25), spec, g);
    StepConfig cfg;
    cfg.dt = 0.5 * eps * eps * eps;
    const int n1 = static_cast<int>(t1 / cfg.dt + 0.5);

    DropletRun out;
    Trajectory seg = run(make_initial_state(spec, phi0, constant_field(g, 0.8)), spec, cfg,
                         n1, std::max(1, n1 / 50));
    for (std::size_t i = 0; i < seg.trace.size(); ++i)
        out.max_disc_t1 = std::max(out.max_disc_t1, seg.trace.disc_pos[i] /
                                                        seg.trace.energy_values[i]);
    out.ratio_t1 = seg.trace.energy_values.back() /
                   (2.0 * spec.theta * total_interface_length(extract_interface(seg.state.phi)));
    out.w_t1 = w_distance_to_limit(seg.state.phi, spec, wtable);

    if (extend) {
        const int n2 = static_cast<int>((t2 - t1) / cfg.dt + 0.5);
        Trajectory tail = run(std::move(seg.state), spec, cfg, n2, n2);
        out.gt_t2 = gibbs_thomson_residual(extract_interface(tail.state.phi), tail.state.mu,
                                           spec.theta);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Command-line helpers for criterion 12

struct CmdResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CmdResult run_cmd(const fs::path& dir, const std::string& cmd) {
    const fs::path so = dir / "stdout.txt", se = dir / "stderr.txt";
    const int rc =
        std::system((cmd + " > " + so.string() + " 2> " + se.string()).c_str());
    CmdResult r;
    r.code = rc == -1 ? -1 : WEXITSTATUS(rc);
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::trunc);
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

    std::vector<Result> res(12);

    // 1: closed-form oracles of the quartic well.
    res[0] = guarded([] {
        const Potential f = quartic_double_well();
        const double theta = surface_tension(f);
        const double w1 = w_transform(f, 1.0), w0 = w_transform(f, 0.0);
        const double kTheta = std::sqrt(2.0) / 3.0;
        const bool ok = std::abs(theta - kTheta) < 1e-10 &&
                        std::abs(w1 - 2.0 * kTheta) < 1e-8 &&
                        std::abs(w0 - kTheta) < 1e-8;
        return Result{ok, fmt("theta = %.12f vs sqrt(2)/3, W(1) - 2theta = %.2e, "
                              "W(0) - theta = %.2e",
                              theta, w1 - 2.0 * kTheta, w0 - kTheta)};
    });

    const ConservationRuns shared = shared_conservation_runs();

    // 2: source-coupled mass sum is conserved in the proliferation model.
    res[1] = Result{shared.p_drift <= 1e-9,
                    fmt("max drift of [phi + sigma] = %.3e over 500 steps at 128^2 "
                        "(tolerance 1e-9)",
                        shared.p_drift)};

    // 3: consumption model: [phi] nonincreasing at bounded rate, sigma in [0, 1].
    {
        const bool ok = shared.h_rise <= 1e-12 && shared.h_rate <= 1.0 + 1e-6 &&
                        shared.h_sigma_lo >= -1e-9 && shared.h_sigma_hi <= 1.0 + 1e-9;
        res[2] = Result{ok, fmt("max [phi] rise = %.2e, max rate = %.4f (cap 1), sigma in "
                                "[%.2e, 1 %+.2e]",
                                shared.h_rise, shared.h_rate, shared.h_sigma_lo,
                                shared.h_sigma_hi - 1.0)};
    }

    // 4: energy-balance residual is first order in dt for both problems.
    res[3] = guarded([] {
        const double eps = 0.08, T = 2e-3;
        const Grid g = make_grid_1d(64, 1.0);
        std::string detail;
        bool ok = true;
        for (int problem = 0; problem < 2; ++problem) {
            const ModelSpec spec =
                problem == 0 ? make_model_spec(Problem::P, quartic_double_well(),
                                               linear_proliferation(0.5), std::nullopt, eps,
                                               1.0, 1.0, T)
                             : make_model_spec(Problem::H, quartic_double_well(),
                                               std::nullopt, smooth_interpolation(), eps,
                                               1.0, 1.0, T);
            const Field phi0 = well_prepared_initial(stripe_geometry(0.5), spec, g);
            const Field s0 = constant_field(g, 0.8);
            std::vector<double> dts = {2e-5, 1e-5, 5e-6}, errs;
            for (double dt : dts) {
                StepConfig cfg;
                cfg.dt = dt;
                const Trajectory tr = run(make_initial_state(spec, phi0, s0), spec, cfg,
                                          static_cast<int>(T / dt + 0.5), 4);
                double mx = 0.0;
                for (double r : energy_balance_residual(tr.trace))
                    mx = std::max(mx, std::abs(r));
                errs.push_back(mx);
            }
            const double order = convergence_order(dts, errs);
            ok = ok && order >= 0.8;
            detail += fmt("%s%s order = %.2f (max residuals %.1e, %.1e, %.1e)",
                          problem ? "; " : "", problem ? "H" : "P", order, errs[0], errs[1],
                          errs[2]);
        }
        return Result{ok, detail};
    });

    // 5: uniform L2 bound || |phi| - 1 || <= sqrt(eps E / cbar_F) on both runs.
    res[4] = Result{shared.bound_ratio <= 1.05,
                    fmt("max || |phi|-1 ||_2 / sqrt(eps E / cbar_F) = %.4f (cap 1.05)",
                        shared.bound_ratio)};

    // 6-9: droplet relaxations.
    Result r6, r7, r8, r9;
    {
        const auto all = guarded([&] {
            const WTable wtable(quartic_double_well());
            const DropletRun a = droplet_relaxation(0.08, wtable, true);
            const DropletRun b = droplet_relaxation(0.04, wtable, true);
            const DropletRun mid = droplet_relaxation(0.03, wtable, false);
            const DropletRun c = droplet_relaxation(0.02, wtable, true);

            const bool in_range = a.ratio_t1 >= 0.9 && a.ratio_t1 <= 1.15 &&
                                  b.ratio_t1 >= 0.9 && b.ratio_t1 <= 1.15 &&
                                  c.ratio_t1 >= 0.9 && c.ratio_t1 <= 1.15;
            const bool tightening = std::abs(b.ratio_t1 - 1.0) < std::abs(a.ratio_t1 - 1.0) &&
                                    std::abs(c.ratio_t1 - 1.0) < std::abs(b.ratio_t1 - 1.0);
            r6 = Result{in_range && tightening,
                        fmt("E/(2 theta L) = %.4f, %.4f, %.4f at eps = 0.08, 0.04, 0.02",
                            a.ratio_t1, b.ratio_t1, c.ratio_t1)};

            // The eps = 0.08 transient under-resolves on the rho = 6 grid (the
            // relaxed profile has no positive discrepancy at all there), so the
            // decay window starts at eps = 0.04.
            const bool disc_ok = mid.max_disc_t1 <= 1.1 * b.max_disc_t1 &&
                                 c.max_disc_t1 <= 1.1 * mid.max_disc_t1 &&
                                 c.max_disc_t1 < b.max_disc_t1;
            r7 = Result{disc_ok,
                        fmt("max disc+/E = %.4f, %.4f, %.4f at eps = 0.04, 0.03, 0.02",
                            b.max_disc_t1, mid.max_disc_t1, c.max_disc_t1)};

            const double order = convergence_order({0.08, 0.04, 0.02},
                                                   {a.w_t1, b.w_t1, c.w_t1});
            const bool w_ok = b.w_t1 < a.w_t1 && c.w_t1 < b.w_t1 && order >= 0.7;
            r8 = Result{w_ok, fmt("w-distance = %.4f, %.4f, %.4f; fitted order = %.2f "
                                  "(need 0.7)",
                                  a.w_t1, b.w_t1, c.w_t1, order)};

            const double cap = 0.15 * std::sqrt(2.0) / 3.0 / 0.25;
            const bool gt_ok = c.gt_t2 <= cap && c.gt_t2 < b.gt_t2;
            r9 = Result{gt_ok, fmt("median |mu - theta kappa| = %.4f (eps 0.04), %.4f "
                                   "(eps 0.02, cap %.4f)",
                                   b.gt_t2, c.gt_t2, cap)};
            return Result{true, ""};
        });
        if (!all.pass) r6 = r7 = r8 = r9 = all;
    }
    res[5] = r6;
    res[6] = r7;
    res[7] = r8;
    res[8] = r9;

    // 10: stress-tensor identity converges at second order in h.
    res[9] = guarded([] {
        const ModelSpec spec =
            make_model_spec(Problem::P, quartic_double_well(), linear_proliferation(0.5),
                            std::nullopt, 0.15, 1.0, 1.0, 1.0);
        std::vector<double> errs;
        for (int n : {64, 128}) {
            const Grid g = make_grid_2d(n, n, 1.0, 1.0);
            const Field phi = make_field(g, [](double x, double y) {
                return 0.5 * std::cos(M_PI * x) * std::cos(2.0 * M_PI * y);
            });
            errs.push_back(stress_tensor_residual(phi, spec));
        }
        const double order = std::log2(errs[0] / errs[1]);
        return Result{order >= 1.7, fmt("residual %.3e -> %.3e from 64^2 to 128^2, order = "
                                        "%.2f (need 1.7)",
                                        errs[0], errs[1], order)};
    });

    // 11: sweep inside the guaranteed-horizon window keeps the mass confined.
    res[10] = guarded([] {
        SweepPlan plan;
        plan.base = make_model_spec(Problem::P, quartic_double_well(),
                                    linear_proliferation(0.5), std::nullopt, 0.08, 1.0, 1.0,
                                    0.01);
        plan.epsilons = {0.08, 0.05};
        plan.geometry = circle_geometry(0.5, 0.5, 0.25);
        plan.sigma0.outside = 0.8;
        const SweepReport rep = run_sweep(plan, 2);
        if (!rep.precheck || *rep.precheck != TimePrecheck::Ass1Holds)
            return Result{false, "precheck did not certify the horizon"};
        bool ok = true;
        double worst_mass = 0.0, worst_drift = 0.0;
        for (const SweepRow& r : rep.rows) {
            ok = ok && r.mass_abs_max <= rep.m0 + 0.02 &&
                 std::abs(r.critical_time - plan.base.T) <= 1e-12 &&
                 r.mass_sum_drift <= 1e-9;
            worst_mass = std::max(worst_mass, r.mass_abs_max);
            worst_drift = std::max(worst_drift, r.mass_sum_drift);
        }
        return Result{ok, fmt("m0 = %.4f, max |[phi]| = %.4f, both phases persist to T, "
                              "max drift = %.1e",
                              rep.m0, worst_mass, worst_drift)};
    });

    // 12: command-line contract: exit codes, determinism, diag consistency.
    res[11] = guarded([&cli]() -> Result {
        if (cli.empty()) return {false, "no --cli path given"};
        const fs::path dir = "/tmp/pftg_acceptance";
        fs::remove_all(dir);
        fs::create_directories(dir);

        const CmdResult chk = run_cmd(dir, cli + " check");
        if (chk.code != 0) return {false, fmt("check exited %d", chk.code)};

        write_file(dir / "ramp.cfg", "problem = H\ninterpolation = ramp\n");
        const CmdResult ramp =
            run_cmd(dir, cli + " check --config " + (dir / "ramp.cfg").string());
        if (ramp.code != 2 || ramp.out.find("H-technical") == std::string::npos)
            return {false, fmt("ramp check exited %d (want 2 naming H-technical)",
                               ramp.code)};

        write_file(dir / "bad.cfg", "epsilon = -1\n");
        const CmdResult bad =
            run_cmd(dir, cli + " run --config " + (dir / "bad.cfg").string());
        if (bad.code != 2) return {false, fmt("invalid config exited %d (want 2)", bad.code)};

        write_file(dir / "run.cfg",
                   "epsilon = 0.08\n[time]\nT = 1.024e-3\n[output]\nsnapshot_stride = 2\n");
        const std::string run_cfg = (dir / "run.cfg").string();
        const CmdResult ra = run_cmd(dir, cli + " run --config " + run_cfg + " --out " +
                                              (dir / "a").string());
        const CmdResult rb = run_cmd(dir, cli + " run --config " + run_cfg + " --out " +
                                              (dir / "b").string());
        if (ra.code != 0 || rb.code != 0)
            return {false, fmt("run exited %d / %d", ra.code, rb.code)};
        if (slurp(dir / "a" / "trace.csv") != slurp(dir / "b" / "trace.csv") ||
            slurp(dir / "a" / "snapshot_000004.bin") !=
                slurp(dir / "b" / "snapshot_000004.bin"))
            return {false, "reruns are not byte-identical"};

        const CmdResult dg =
            run_cmd(dir, cli + " diag " + (dir / "a" / "snapshot_000004.bin").string());
        if (dg.code != 0) return {false, fmt("diag exited %d", dg.code)};
        const auto epos = dg.out.find("\nE = ");
        if (epos == std::string::npos) return {false, "diag printed no energy"};
        const double diag_e = std::strtod(dg.out.c_str() + epos + 5, nullptr);
        const std::string trace = slurp(dir / "a" / "trace.csv");
        const auto last_row = trace.rfind('\n', trace.size() - 2);
        const auto c1 = trace.find(',', last_row);
        const double trace_e = std::strtod(trace.c_str() + c1 + 1, nullptr);
        if (std::abs(diag_e - trace_e) > 1e-12)
            return {false, fmt("diag energy %.17g vs trace %.17g", diag_e, trace_e)};

        write_file(dir / "abort.cfg", "[sweep]\nepsilons = 0.2 0.1\n[time]\nT = 1e-4\n");
        const CmdResult ab = run_cmd(dir, cli + " sweep --config " + (dir / "abort.cfg").string() +
                                              " --out " + (dir / "s").string());
        if (ab.code != 3) return {false, fmt("failing sweep exited %d (want 3)", ab.code)};

        return {true, "check/run/diag/sweep codes, byte-identical reruns, diag matches trace"};
    });

    int failures = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        std::printf("[%s] criterion %02zu: %s\n", res[i].pass ? "PASS" : "FAIL", i + 1,
                    res[i].detail.c_str());
        if (!res[i].pass) ++failures;
    }
    std::printf("%d of 12 criteria passed\n", 12 - failures);
    return failures == 0 ? 0 : 1;
}
