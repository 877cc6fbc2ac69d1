#ifndef PFTG_SPECTRAL_HPP
#define PFTG_SPECTRAL_HPP

// Fast solves with the mirrored-ghost Neumann Laplacian.  The cell-centered
// stencil diagonalizes under the even cosine transform (DCT-II), with modes
// cos(πk(i + 1/2)/n) and eigenvalues -(2/h²)(1 - cos(πk/n)) per direction.
// Spatially varying zeroth-order coefficients fall back to preconditioned CG.

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pftg/grid.hpp"

namespace pftg {

namespace detail {

struct DctPlans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~DctPlans() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

// Plan creation is not thread safe; executing a cached plan on new arrays is.
inline const DctPlans& dct_plans(int n_x, int n_y) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<DctPlans>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n_x, n_y}];
    if (!slot) {
        slot = std::make_unique<DctPlans>();
        std::vector<double> a(static_cast<std::size_t>(n_x) * n_y);
        std::vector<double> b(a.size());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        slot->forward = fftw_plan_r2r_2d(n_y, n_x, a.data(), b.data(),
                                         FFTW_REDFT10, FFTW_REDFT10, flags);
        slot->backward = fftw_plan_r2r_2d(n_y, n_x, a.data(), b.data(),
                                          FFTW_REDFT01, FFTW_REDFT01, flags);
        if (!slot->forward || !slot->backward)
            throw std::runtime_error("spectral: transform planning failed");
    }
    return *slot;
}

} // namespace detail

// Laplacian eigenvalues (nonnegative sign convention) ordered like the
// spectral coefficients: lambda[ky * n_x + kx].
inline std::vector<double> neumann_eigenvalues(const Grid& g) {
    std::vector<double> lx(g.n_x), ly(g.n_y);
    for (int k = 0; k < g.n_x; ++k)
        lx[k] = 2.0 / (g.h_x * g.h_x) * (1.0 - std::cos(M_PI * k / g.n_x));
    for (int k = 0; k < g.n_y; ++k)
        ly[k] = 2.0 / (g.h_y * g.h_y) * (1.0 - std::cos(M_PI * k / g.n_y));
    std::vector<double> lambda(g.size());
    for (int ky = 0; ky < g.n_y; ++ky)
        for (int kx = 0; kx < g.n_x; ++kx)
            lambda[static_cast<std::size_t>(ky) * g.n_x + kx] = lx[kx] + ly[ky];
    return lambda;
}

inline void dct_forward(const Grid& g, const std::vector<double>& in, std::vector<double>& out) {
    out.resize(in.size());
    fftw_execute_r2r(detail::dct_plans(g.n_x, g.n_y).forward,
                     const_cast<double*>(in.data()), out.data());
}

// Inverse of dct_forward up to the factor 4 n_x n_y, which the caller folds
// into the spectral multiplier.
inline void dct_backward(const Grid& g, const std::vector<double>& in, std::vector<double>& out) {
    out.resize(in.size());
    fftw_execute_r2r(detail::dct_plans(g.n_x, g.n_y).backward,
                     const_cast<double*>(in.data()), out.data());
}

inline double dct_normalization(const Grid& g) { return 4.0 * g.n_x * g.n_y; }

inline Field helmholtz_apply(double a, const Field& b, const Field& u) {
    Field out = laplacian(u);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = (a + b.values[i]) * u.values[i] - out.values[i];
    return out;
}

// Solves a·u + b·u - Δu = rhs with homogeneous Neumann data.
//   constant b:  exact spectral division;
//   varying b:   CG preconditioned with (a + mean(b)) I - Δ.
// The singular case a + b = 0 requires a mean-free right-hand side and
// returns the mean-free solution.
inline Field solve_helmholtz(double a, const Field& b, const Field& rhs, double tol = 1e-10,
                             int max_iterations = 500) {
    const Grid& g = rhs.grid;
    if (!(b.grid == g)) throw std::invalid_argument("solve_helmholtz: coefficient grid mismatch");
    if (a < 0.0) throw std::invalid_argument("solve_helmholtz: a must be nonnegative");
    double b_min = b.values[0], b_max = b.values[0], b_sum = 0.0;
    for (double v : b.values) {
        b_min = std::min(b_min, v);
        b_max = std::max(b_max, v);
        b_sum += v;
    }
    if (b_min < 0.0) throw std::invalid_argument("solve_helmholtz: b must be nonnegative");
    const double b_mean = b_sum / static_cast<double>(b.values.size());
    const bool b_const = (b_max - b_min) <= 1e-13 * (1.0 + std::abs(b_mean));

    const std::vector<double> lambda = neumann_eigenvalues(g);
    const double norm = dct_normalization(g);

    if (b_const) {
        const double shift = a + b_mean;
        std::vector<double> spec;
        dct_forward(g, rhs.values, spec);
        if (shift <= 1e-300) {
            // Pure Neumann Poisson problem: solvable only for mean-free data.
            const double rhs_mean = average(rhs);
            if (std::abs(rhs_mean) > tol * (1.0 + norm_l2(rhs)))
                throw std::invalid_argument(
                    "solve_helmholtz: zero-order coefficient vanishes and rhs has nonzero mean " +
                    std::to_string(rhs_mean));
            spec[0] = 0.0;
            for (std::size_t i = 1; i < spec.size(); ++i) spec[i] /= norm * lambda[i];
        } else {
            for (std::size_t i = 0; i < spec.size(); ++i) spec[i] /= norm * (shift + lambda[i]);
        }
        Field u{g, {}};
        dct_backward(g, spec, u.values);
        return u;
    }

    // Preconditioned conjugate gradient.  The operator is symmetric positive
    // definite: a >= 0, b >= 0 with b not identically zero on this branch.
    const double precond_shift = a + b_mean;
    auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
        std::vector<double> spec;
        dct_forward(g, r, spec);
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] /= norm * (precond_shift + lambda[i]);
        dct_backward(g, spec, z);
    };

    Field u = constant_field(g, 0.0);
    Field r = rhs;
    const double rhs_norm = norm_l2(rhs);
    if (rhs_norm == 0.0) return u;
    Field z{g, {}};
    precond(r.values, z.values);
    Field p = z;
    double rz = dot_l2(r, z);
    for (int it = 0; it < max_iterations; ++it) {
        if (norm_l2(r) <= tol * rhs_norm) return u;
        const Field Ap = helmholtz_apply(a, b, p);
        const double alpha = rz / dot_l2(p, Ap);
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            u.values[i] += alpha * p.values[i];
            r.values[i] -= alpha * Ap.values[i];
        }
        precond(r.values, z.values);
        const double rz_next = dot_l2(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < p.values.size(); ++i)
            p.values[i] = z.values[i] + beta * p.values[i];
    }
    if (norm_l2(r) <= tol * rhs_norm) return u;
    throw std::runtime_error("solve_helmholtz: CG stalled at relative residual " +
                             std::to_string(norm_l2(r) / rhs_norm));
}

} // namespace pftg

#endif
