#ifndef PFTG_SOLVER_HPP
#define PFTG_SOLVER_HPP

// Linearly implicit stabilized one-step scheme for the coupled system.  Per
// step, with explicit well derivative and stabilization s:
//
//   (φⁿ⁺¹ - φⁿ)/dt = Δμⁿ⁺¹ + Rⁿ⁺¹
//   μⁿ⁺¹           = -ε Δφⁿ⁺¹ + (F'(φⁿ) + s (φⁿ⁺¹ - φⁿ))/ε
//   (σⁿ⁺¹ - σⁿ)/dt = Δσⁿ⁺¹ + Sⁿ⁺¹
//
// Problem P:  Rⁿ⁺¹ = P(φⁿ)(σⁿ⁺¹ - μⁿ⁺¹) = -Sⁿ⁺¹.  The φ/μ pair is inverted
// exactly in cosine space with the source frozen from the previous inner
// iterate; the σ equation keeps its sink implicit.  The two sources cancel
// identically, so the mean of φ + σ is conserved to solver tolerance.
//
// Problem H:  Rⁿ⁺¹ = (σⁿ⁺¹ - 1) H(φⁿ), Sⁿ⁺¹ = -σⁿ⁺¹ H(φⁿ).  The σ equation
// decouples and is an M-matrix system, which keeps σ inside [0, 1].

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "pftg/diagnostics.hpp"
#include "pftg/grid.hpp"
#include "pftg/model.hpp"
#include "pftg/spectral.hpp"
#include "pftg/state.hpp"

namespace pftg {

struct StepConfig {
    double dt = 1e-5;
    double s = 2.0;                    // stabilization, at least half the well curvature range
    double fixed_point_tol = 1e-11;    // relative residual of the coupled system
    int max_inner_iterations = 50;
    double helmholtz_tol = 1e-12;
    double sigma_box_tol = 1e-9;       // admissible overshoot of 0 <= sigma <= 1 (problem H)
    double blowup_factor = 10.0;       // energy growth per step treated as blow-up
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, int step = -1, double residual = 0.0)
        : std::runtime_error(msg), step_index(step), last_residual(residual) {}
    int step_index;
    double last_residual;
};

namespace detail {

// Exact cosine-space inversion of the φ/μ block for a frozen source r:
//   φ (1 + dt (s/ε) λ + dt ε λ²) = φⁿ + dt r + dt λ ((s/ε) φⁿ - F'(φⁿ)/ε).
struct PhiBlockSolver {
    const Grid& grid;
    const ModelSpec& spec;
    const StepConfig& cfg;
    std::vector<double> lambda;
    double norm;
    std::vector<double> phi_n_hat, fprime_hat;
    Field fprime;

    PhiBlockSolver(const Grid& g, const ModelSpec& sp, const StepConfig& c, const Field& phi_n)
        : grid(g), spec(sp), cfg(c), lambda(neumann_eigenvalues(g)), norm(dct_normalization(g)),
          fprime{g, std::vector<double>(g.size())} {
        for (std::size_t i = 0; i < phi_n.values.size(); ++i)
            fprime.values[i] = spec.potential.deriv(phi_n.values[i]);
        dct_forward(g, phi_n.values, phi_n_hat);
        dct_forward(g, fprime.values, fprime_hat);
    }

    void solve(const Field& source, const Field& phi_n, Field& phi, Field& mu) const {
        const double dt = cfg.dt, eps = spec.epsilon, s = cfg.s;
        std::vector<double> spec_rhs;
        dct_forward(grid, source.values, spec_rhs);
        for (std::size_t i = 0; i < spec_rhs.size(); ++i) {
            const double l = lambda[i];
            const double numer = phi_n_hat[i] + dt * spec_rhs[i] +
                                 dt * l * ((s / eps) * phi_n_hat[i] - fprime_hat[i] / eps);
            spec_rhs[i] = numer / (norm * (1.0 + dt * (s / eps) * l + dt * eps * l * l));
        }
        phi.grid = grid;
        dct_backward(grid, spec_rhs, phi.values);
        mu = laplacian(phi);
        for (std::size_t i = 0; i < mu.values.size(); ++i)
            mu.values[i] = -eps * mu.values[i] +
                           (fprime.values[i] + s * (phi.values[i] - phi_n.values[i])) / eps;
    }
};

inline void require_finite(const Field& f, const char* what) {
    if (!is_finite(f))
        throw SolverError(std::string("solver: ") + what +
                          " became non-finite; reduce the time step");
}

} // namespace detail

// One step of problem P.  Inner fixed-point iteration over the reaction
// coupling, each pass using exact constant-coefficient solves.
inline void step_P(State& state, const ModelSpec& spec, const StepConfig& cfg) {
    if (spec.problem != Problem::P) throw std::invalid_argument("step_P: spec is not problem P");
    const Grid& g = state.phi.grid;
    const double dt = cfg.dt;
    if (!(dt > 0.0)) throw std::invalid_argument("step_P: dt must be positive");
    detail::require_finite(state.phi, "phi");
    detail::require_finite(state.sigma, "sigma");
    detail::require_finite(state.mu, "mu");

    Field prolif{g, std::vector<double>(g.size())};
    for (std::size_t i = 0; i < prolif.values.size(); ++i)
        prolif.values[i] = spec.proliferation->eval(state.phi.values[i]);

    const detail::PhiBlockSolver block(g, spec, cfg, state.phi);
    const double scale = norm_l2(state.phi) + norm_l2(state.sigma) + 1.0;

    Field mu_i = state.mu;
    Field sigma_i = state.sigma;
    Field phi{g, {}}, mu{g, {}}, sigma{g, {}}, source{g, std::vector<double>(g.size())};
    Field sigma_rhs{g, std::vector<double>(g.size())};

    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_inner_iterations; ++it) {
        for (std::size_t i = 0; i < source.values.size(); ++i)
            source.values[i] = prolif.values[i] * (sigma_i.values[i] - mu_i.values[i]);
        block.solve(source, state.phi, phi, mu);
        detail::require_finite(phi, "phi");
        detail::require_finite(mu, "mu");

        for (std::size_t i = 0; i < sigma_rhs.values.size(); ++i)
            sigma_rhs.values[i] = state.sigma.values[i] / dt + prolif.values[i] * mu.values[i];
        sigma = solve_helmholtz(1.0 / dt, prolif, sigma_rhs, cfg.helmholtz_tol);

        // Coupled residual: the φ equation saw the stale source, the σ
        // equation is solved to Helmholtz tolerance.
        Field r1 = laplacian(mu);
        double acc = 0.0;
        for (std::size_t i = 0; i < r1.values.size(); ++i) {
            const double coupled = prolif.values[i] * (sigma.values[i] - mu.values[i]);
            const double e1 = (phi.values[i] - state.phi.values[i]) / dt - r1.values[i] - coupled;
            acc += e1 * e1;
        }
        residual = dt * std::sqrt(acc * g.cell_measure()) / scale;
        if (residual <= cfg.fixed_point_tol) {
            state.phi = std::move(phi);
            state.mu = std::move(mu);
            state.sigma = std::move(sigma);
            state.t += dt;
            detail::require_finite(state.phi, "phi");
            detail::require_finite(state.sigma, "sigma");
            return;
        }
        mu_i = mu;
        sigma_i = sigma;
    }
    throw SolverError("step_P: inner iteration did not reach the requested tolerance",
                      -1, residual);
}

// One step of problem H.  The σ equation decouples; its implicit sink makes
// the system an M-matrix, so the step preserves the box 0 <= σ <= 1 (checked
// up to solver tolerance).
inline void step_H(State& state, const ModelSpec& spec, const StepConfig& cfg) {
    if (spec.problem != Problem::H) throw std::invalid_argument("step_H: spec is not problem H");
    const Grid& g = state.phi.grid;
    const double dt = cfg.dt;
    if (!(dt > 0.0)) throw std::invalid_argument("step_H: dt must be positive");
    detail::require_finite(state.phi, "phi");
    detail::require_finite(state.sigma, "sigma");

    Field interp{g, std::vector<double>(g.size())};
    for (std::size_t i = 0; i < interp.values.size(); ++i)
        interp.values[i] = spec.interpolation->eval(state.phi.values[i]);

    Field sigma_rhs = state.sigma;
    for (auto& v : sigma_rhs.values) v /= dt;
    Field sigma = solve_helmholtz(1.0 / dt, interp, sigma_rhs, cfg.helmholtz_tol);

    double lo = sigma.values[0], hi = sigma.values[0];
    for (double v : sigma.values) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (lo < -cfg.sigma_box_tol || hi > 1.0 + cfg.sigma_box_tol)
        throw SolverError("step_H: nutrient left the box [0, 1]: range [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");

    Field source{g, std::vector<double>(g.size())};
    for (std::size_t i = 0; i < source.values.size(); ++i)
        source.values[i] = (sigma.values[i] - 1.0) * interp.values[i];

    const detail::PhiBlockSolver block(g, spec, cfg, state.phi);
    Field phi{g, {}}, mu{g, {}};
    block.solve(source, state.phi, phi, mu);

    state.phi = std::move(phi);
    state.mu = std::move(mu);
    state.sigma = std::move(sigma);
    state.t += dt;
    detail::require_finite(state.phi, "phi");
    detail::require_finite(state.sigma, "sigma");
}

inline void step(State& state, const ModelSpec& spec, const StepConfig& cfg) {
    if (spec.problem == Problem::P) step_P(state, spec, cfg);
    else step_H(state, spec, cfg);
}

struct Trajectory {
    State state;
    DiagnosticsTrace trace;
};

// Advances n_steps from the initial state, recording the diagnostics trace
// every trace_stride steps (plus the initial and final slices) and invoking
// the observer at snapshot_stride when one is given.
inline Trajectory run(State initial, const ModelSpec& spec, const StepConfig& cfg, int n_steps,
                      int trace_stride = 1,
                      const std::function<void(int, const State&)>& observer = {},
                      int snapshot_stride = 0) {
    if (n_steps < 1) throw std::invalid_argument("run: need at least one step");
    if (trace_stride < 1) throw std::invalid_argument("run: trace stride must be positive");
    Trajectory out;
    out.state = std::move(initial);
    out.trace = make_trace(spec, out.state.phi.grid);
    append_state(out.trace, out.state, spec);
    if (observer && snapshot_stride > 0) observer(0, out.state);

    double prev_energy = out.trace.energy_values.back();
    for (int n = 1; n <= n_steps; ++n) {
        try {
            step(out.state, spec, cfg);
        } catch (SolverError& err) {
            throw SolverError(std::string(err.what()) + " at step " + std::to_string(n), n,
                              err.last_residual);
        }
        if (n % trace_stride == 0 || n == n_steps) {
            append_state(out.trace, out.state, spec);
            const double e = out.trace.energy_values.back();
            if (!std::isfinite(e) || e > cfg.blowup_factor * std::max(prev_energy, 1e-12))
                throw SolverError("run: energy blow-up detected; reduce the time step", n, e);
            prev_energy = e;
        }
        if (observer && snapshot_stride > 0 && (n % snapshot_stride == 0 || n == n_steps))
            observer(n, out.state);
    }
    return out;
}

} // namespace pftg

#endif
