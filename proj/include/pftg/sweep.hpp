#ifndef PFTG_SWEEP_HPP
#define PFTG_SWEEP_HPP

// Interface-width sweeps: well-prepared initial data over simple geometries,
// per-ε resolution and step-size rules, and a cross-ε convergence report.

#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pftg/solver.hpp"

namespace pftg {

struct CircleSpec {
    double cx = 0.5, cy = 0.5;
    double radius = 0.25;
};

// Tumour region at t = 0.  A stripe is the half plane x < position.
struct Geometry {
    enum class Kind { Circle, Stripe, Circles };
    Kind kind = Kind::Circle;
    std::vector<CircleSpec> circles;
    double stripe_position = 0.5;
};

inline Geometry circle_geometry(double cx, double cy, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("circle_geometry: radius must be positive");
    return Geometry{Geometry::Kind::Circle, {CircleSpec{cx, cy, radius}}, 0.0};
}

inline Geometry stripe_geometry(double position) {
    return Geometry{Geometry::Kind::Stripe, {}, position};
}

inline Geometry circles_geometry(std::vector<CircleSpec> circles) {
    if (circles.empty()) throw std::invalid_argument("circles_geometry: need at least one circle");
    for (const auto& c : circles)
        if (!(c.radius > 0.0))
            throw std::invalid_argument("circles_geometry: radius must be positive");
    return Geometry{Geometry::Kind::Circles, std::move(circles), 0.0};
}

// Signed distance to the tumour boundary, positive inside the tumour.
inline double signed_distance(const Geometry& geo, double x, double y) {
    if (geo.kind == Geometry::Kind::Stripe) return geo.stripe_position - x;
    double d = -std::numeric_limits<double>::infinity();
    for (const auto& c : geo.circles)
        d = std::max(d, c.radius - std::hypot(x - c.cx, y - c.cy));
    return d;
}

// Distance from the tumour boundary to the edge of the box [0,Lx]×[0,Ly].
inline double boundary_clearance(const Geometry& geo, double L_x, double L_y) {
    if (geo.kind == Geometry::Kind::Stripe)
        return std::min(geo.stripe_position, L_x - geo.stripe_position);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& c : geo.circles) {
        const double margin = std::min(std::min(c.cx, L_x - c.cx), std::min(c.cy, L_y - c.cy));
        worst = std::min(worst, margin - c.radius);
    }
    return worst;
}

// Optimal 1D transition profile: q' = √(2F(q)), q(0) = 0, tabulated by RK4
// and linearly interpolated.  For the quartic well q(s) = tanh(s/√2).
class TransitionProfile {
public:
    explicit TransitionProfile(const Potential& pot, double half_range = 40.0, double ds = 1e-3)
        : half_range_(half_range), ds_(ds) {
        if (!(half_range > 0.0) || !(ds > 0.0) || ds >= half_range)
            throw std::invalid_argument("TransitionProfile: bad range or step");
        const auto slope = [&pot](double q) {
            const double f = pot.eval(q);
            return f > 0.0 ? std::sqrt(2.0 * f) : 0.0;
        };
        const auto rk4 = [&slope](double q, double h) {
            const double k1 = slope(q);
            const double k2 = slope(q + 0.5 * h * k1);
            const double k3 = slope(q + 0.5 * h * k2);
            const double k4 = slope(q + h * k3);
            return q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        };
        const std::size_t half = static_cast<std::size_t>(std::llround(half_range / ds));
        values_.assign(2 * half + 1, 0.0);
        for (std::size_t i = 0; i < half; ++i)
            values_[half + i + 1] = rk4(values_[half + i], ds);
        for (std::size_t i = 0; i < half; ++i)
            values_[half - i - 1] = rk4(values_[half - i], -ds);
    }

    double operator()(double s) const {
        if (s <= -half_range_) return values_.front();
        if (s >= half_range_) return values_.back();
        const double u = (s + half_range_) / ds_;
        const std::size_t i = std::min(static_cast<std::size_t>(u), values_.size() - 2);
        const double a = u - static_cast<double>(i);
        return (1.0 - a) * values_[i] + a * values_[i + 1];
    }

private:
    double half_range_, ds_;
    std::vector<double> values_;
};

// φ₀(x) = q(dist(x)/ε).  The interface must keep a clearance of 3ε from the
// domain boundary: at that distance the profile tail is below 3e-2 and its
// energy contribution below 0.1%, so the layer effectively fits the box.
inline Field well_prepared_initial(const Geometry& geo, const ModelSpec& spec, const Grid& g,
                                   const TransitionProfile& profile) {
    const double clearance = boundary_clearance(geo, spec.L_x, spec.L_y);
    if (clearance < 3.0 * spec.epsilon)
        throw std::invalid_argument("well_prepared_initial: geometry clearance " +
                                    std::to_string(clearance) + " is below 3 epsilon = " +
                                    std::to_string(3.0 * spec.epsilon));
    return make_field(g, [&](double x, double y) {
        return profile(signed_distance(geo, x, y) / spec.epsilon);
    });
}

inline Field well_prepared_initial(const Geometry& geo, const ModelSpec& spec, const Grid& g) {
    return well_prepared_initial(geo, spec, g, TransitionProfile(spec.potential));
}

// Initial nutrient: constant, or interpolated across the layer between an
// outside and an inside value (radial for circular geometries).
struct Sigma0 {
    double outside = 0.8;
    std::optional<double> inside;
};

inline Field initial_nutrient(const Sigma0& s0, const Field& phi0) {
    const auto check = [](double v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("initial_nutrient: values must lie in [0, 1]");
    };
    check(s0.outside);
    if (!s0.inside) return constant_field(phi0.grid, s0.outside);
    check(*s0.inside);
    Field out{phi0.grid, std::vector<double>(phi0.grid.size())};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double w = 0.5 * (1.0 + std::clamp(phi0.values[i], -1.0, 1.0));
        out.values[i] = s0.outside + (*s0.inside - s0.outside) * w;
    }
    return out;
}

struct SweepPlan {
    ModelSpec base;              // per-run epsilon is overwritten from `epsilons`
    std::vector<double> epsilons;  // strictly decreasing, positive
    Geometry geometry;
    Sigma0 sigma0;
    double rho = 6.0;            // resolution rule: ε/h ≥ rho
    double c_dt = 0.5;           // step rule: dt = c_dt ε³, rounded to divide T
    StepConfig step;             // dt is overwritten per run
    int holder_intervals = 16;   // snapshot intervals for the Hölder quotients
    int max_trace_points = 2001;
};

struct SweepRow {
    double epsilon = 0.0;
    int n_x = 0, n_y = 0;
    double dt = 0.0;
    int n_steps = 0;
    double energy_initial = 0.0, energy_final = 0.0;
    double combined_initial = 0.0;  // E(0) + ½‖σ₀‖², feeds the shared bound E₀
    double ratio_initial = 0.0;     // E/(2θ·interface length)
    double ratio_final = std::numeric_limits<double>::quiet_NaN();
    int curves_final = 0;           // 0 flags a vanished interface (NaN columns)
    double w_distance = 0.0;        // final-time L¹ distance of w(φ) to the sharp limit
    double gt_residual = std::numeric_limits<double>::quiet_NaN();
    double max_disc_ratio = 0.0;    // max over time of discrepancy⁺ / E
    double mass_initial = 0.0, mass_final = 0.0, mass_abs_max = 0.0;
    double sum_initial = 0.0;       // [φ₀ + σ₀]
    double mass_sum_drift = std::numeric_limits<double>::quiet_NaN();  // problem P
    double mass_rate_max = std::numeric_limits<double>::quiet_NaN();   // problem H
    double critical_time = 0.0;
    double holder_chi = 0.0;        // indicator, L¹, exponent 1/8
    double holder_phi = 0.0;        // phase field, L², exponent 1/16
    DiagnosticsTrace trace;         // full scalar history of the run
};

struct SweepReport {
    double E0 = 0.0;  // shared initial bound: max over runs of E(0) + ½‖σ₀‖²
    double c0 = 0.0;  // max over runs of |[φ₀]|
    double d0 = 0.0;  // max over runs of |[φ₀ + σ₀]|
    std::optional<TimePrecheck> precheck;  // problem P only
    double m0 = std::numeric_limits<double>::quiet_NaN();  // mass bound under ass1
    std::vector<SweepRow> rows;  // ε descending, same order as the plan
};

class SweepError : public std::runtime_error {
public:
    SweepError(const std::string& msg, double eps, SweepReport completed)
        : std::runtime_error(msg), epsilon(eps), partial(std::move(completed)) {}
    double epsilon;
    SweepReport partial;  // rows of the runs that finished
};

namespace detail {

inline void validate_plan(const SweepPlan& plan) {
    if (plan.epsilons.empty()) throw std::invalid_argument("run_sweep: empty epsilon list");
    for (std::size_t i = 0; i < plan.epsilons.size(); ++i) {
        if (!(plan.epsilons[i] > 0.0))
            throw std::invalid_argument("run_sweep: epsilons must be positive");
        if (i > 0 && !(plan.epsilons[i] < plan.epsilons[i - 1]))
            throw std::invalid_argument("run_sweep: epsilons must be strictly decreasing");
    }
    if (!(plan.rho >= 6.0))
        throw std::invalid_argument("run_sweep: resolution ratio must be at least 6");
    if (!(plan.c_dt > 0.0)) throw std::invalid_argument("run_sweep: c_dt must be positive");
    if (!(plan.base.T > 0.0)) throw std::invalid_argument("run_sweep: horizon must be positive");
    if (plan.holder_intervals < 1 || plan.max_trace_points < 2)
        throw std::invalid_argument("run_sweep: bad sampling parameters");
    if (plan.geometry.kind != Geometry::Kind::Stripe && plan.geometry.circles.empty())
        throw std::invalid_argument("run_sweep: geometry has no circles");
}

inline SweepRow sweep_single(const SweepPlan& plan, double eps,
                             const TransitionProfile& profile, const WTable& wtable) {
    ModelSpec spec = plan.base;
    spec.epsilon = eps;

    SweepRow row;
    row.epsilon = eps;
    row.n_x = static_cast<int>(std::ceil(spec.L_x * plan.rho / eps));
    row.n_y = static_cast<int>(std::ceil(spec.L_y * plan.rho / eps));
    const Grid g = make_grid_2d(row.n_x, row.n_y, spec.L_x, spec.L_y);

    row.n_steps = std::max(1, static_cast<int>(std::ceil(spec.T / (plan.c_dt * eps * eps * eps))));
    row.dt = spec.T / row.n_steps;
    StepConfig cfg = plan.step;
    cfg.dt = row.dt;

    const Field phi0 = well_prepared_initial(plan.geometry, spec, g, profile);
    const Field sigma0 = initial_nutrient(plan.sigma0, phi0);
    State init = make_initial_state(spec, phi0, sigma0);

    const int trace_stride = std::max(1, row.n_steps / (plan.max_trace_points - 1));
    const int holder_stride = std::max(1, row.n_steps / plan.holder_intervals);
    std::vector<double> snap_times;
    std::vector<Field> snap_phi, snap_chi;
    const auto observer = [&](int, const State& st) {
        snap_times.push_back(st.t);
        snap_phi.push_back(st.phi);
        snap_chi.push_back(phase_indicator(st.phi));
    };

    const Trajectory tr = run(std::move(init), spec, cfg, row.n_steps, trace_stride,
                              observer, holder_stride);
    const DiagnosticsTrace& trace = tr.trace;

    row.energy_initial = trace.energy_values.front();
    row.energy_final = trace.energy_values.back();
    row.combined_initial = row.energy_initial + trace.half_sigma_l2.front();

    const double theta2 = 2.0 * spec.theta;
    row.ratio_initial = row.energy_initial / (theta2 * total_interface_length(extract_interface(phi0)));
    try {
        const auto curves = extract_interface(tr.state.phi);
        row.curves_final = static_cast<int>(curves.size());
        row.ratio_final = row.energy_final / (theta2 * total_interface_length(curves));
        row.gt_residual = gibbs_thomson_residual(curves, tr.state.mu, spec.theta);
    } catch (const std::invalid_argument&) {
        row.curves_final = 0;  // interface vanished; NaN columns stand
    }

    row.w_distance = w_distance_to_limit(tr.state.phi, spec, wtable);

    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double e = std::max(trace.energy_values[i], 1e-30);
        row.max_disc_ratio = std::max(row.max_disc_ratio, trace.disc_pos[i] / e);
        row.mass_abs_max = std::max(row.mass_abs_max, std::abs(trace.mass_phi[i]));
    }
    row.mass_initial = trace.mass_phi.front();
    row.mass_final = trace.mass_phi.back();
    row.sum_initial = trace.mass_sum.front();
    if (spec.problem == Problem::P) {
        double drift = 0.0;
        for (double m : trace.mass_sum) drift = std::max(drift, std::abs(m - row.sum_initial));
        row.mass_sum_drift = drift;
    } else {
        double rate = 0.0;
        for (std::size_t i = 0; i + 1 < trace.size(); ++i)
            rate = std::max(rate, (trace.mass_phi[i] - trace.mass_phi[i + 1]) /
                                      (trace.times[i + 1] - trace.times[i]));
        row.mass_rate_max = rate;
    }
    row.critical_time = critical_time(trace);
    row.holder_chi = holder_quotient(snap_times, snap_chi, 1.0 / 8.0, SnapshotNorm::L1);
    row.holder_phi = holder_quotient(snap_times, snap_phi, 1.0 / 16.0, SnapshotNorm::L2);
    row.trace = trace;
    return row;
}

} // namespace detail

// Runs the plan for every ε (optionally on several threads), then aggregates
// the cross-ε evidence.  A failing run aborts the sweep with its ε attached
// and the completed rows preserved.
inline SweepReport run_sweep(const SweepPlan& plan, int n_threads = 1) {
    detail::validate_plan(plan);
    if (n_threads < 1) throw std::invalid_argument("run_sweep: thread count must be positive");
    {
        const ValidationReport hyp = check_assumptions(plan.base);
        if (!hyp.all_pass()) {
            std::string ids;
            for (const auto& c : hyp.checks)
                if (!c.pass) ids += (ids.empty() ? "" : ", ") + c.id;
            throw std::invalid_argument("run_sweep: model hypotheses fail: " + ids);
        }
    }

    const TransitionProfile profile(plan.base.potential);
    const WTable wtable(plan.base.potential);

    const std::size_t count = plan.epsilons.size();
    std::vector<std::optional<SweepRow>> rows(count);
    std::vector<std::optional<std::string>> failures(count);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                rows[i] = detail::sweep_single(plan, plan.epsilons[i], profile, wtable);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const int spawn = static_cast<int>(std::min<std::size_t>(n_threads, count));
    if (spawn <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepReport report;
    for (std::size_t i = 0; i < count; ++i)
        if (rows[i]) report.rows.push_back(*rows[i]);
    for (const SweepRow& r : report.rows) {
        report.E0 = std::max(report.E0, r.combined_initial);
        report.c0 = std::max(report.c0, std::abs(r.mass_initial));
        report.d0 = std::max(report.d0, std::abs(r.sum_initial));
    }
    for (std::size_t i = 0; i < count; ++i)
        if (failures[i])
            throw SweepError("run_sweep: run for epsilon = " + std::to_string(plan.epsilons[i]) +
                                 " failed: " + *failures[i],
                             plan.epsilons[i], std::move(report));

    if (plan.base.problem == Problem::P && plan.base.proliferation) {
        const Potential& F = plan.base.potential;
        const double omega = plan.base.L_x * plan.base.L_y;
        report.precheck = precheck_global_time(plan.base.T, report.E0, report.c0, report.d0,
                                               omega, F.c_F, F.C_F,
                                               plan.base.proliferation->C_P);
        if (*report.precheck == TimePrecheck::Ass1Holds)
            report.m0 = mass_confinement_bound(plan.base.T, report.E0, report.c0, omega, F.c_F,
                                               F.C_F, plan.base.proliferation->C_P);
    }
    return report;
}

// Least-squares slope of log y against log x.
inline double convergence_order(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw std::invalid_argument("convergence_order: need at least 3 pairs");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("convergence_order: entries must be positive");
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(xs.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace pftg

#endif
