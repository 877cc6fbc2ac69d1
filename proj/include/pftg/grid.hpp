#ifndef PFTG_GRID_HPP
#define PFTG_GRID_HPP

// Uniform cell-centered grids with homogeneous Neumann boundary handling via
// mirrored ghost cells, plus the discrete operators built on them.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pftg {

struct Grid {
    int dim = 2;
    int n_x = 0, n_y = 0;
    double h_x = 0.0, h_y = 0.0;

    double length_x() const { return n_x * h_x; }
    double length_y() const { return n_y * h_y; }
    double cell_measure() const { return h_x * h_y; }
    double measure() const { return length_x() * (dim == 2 ? length_y() : 1.0); }
    std::size_t size() const { return static_cast<std::size_t>(n_x) * n_y; }
    double x(int ix) const { return (ix + 0.5) * h_x; }
    double y(int iy) const { return (iy + 0.5) * h_y; }

    bool operator==(const Grid&) const = default;
};

inline Grid make_grid_2d(int n_x, int n_y, double L_x, double L_y) {
    if (n_x < 4 || n_y < 4) throw std::invalid_argument("make_grid_2d: need at least 4 cells per direction");
    if (!(L_x > 0.0) || !(L_y > 0.0)) throw std::invalid_argument("make_grid_2d: domain lengths must be positive");
    return Grid{2, n_x, n_y, L_x / n_x, L_y / n_y};
}

inline Grid make_grid_1d(int n_x, double L_x) {
    if (n_x < 4) throw std::invalid_argument("make_grid_1d: need at least 4 cells");
    if (!(L_x > 0.0)) throw std::invalid_argument("make_grid_1d: domain length must be positive");
    // Single row of unit depth: the y stencil legs mirror onto the center and drop out.
    return Grid{1, n_x, 1, L_x / n_x, 1.0};
}

struct Field {
    Grid grid;
    std::vector<double> values;   // row-major, index iy * n_x + ix

    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * grid.n_x + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.n_x + ix]; }
};

inline Field constant_field(const Grid& g, double v) { return Field{g, std::vector<double>(g.size(), v)}; }

inline Field make_field(const Grid& g, const std::function<double(double, double)>& f) {
    Field out{g, std::vector<double>(g.size())};
    for (int iy = 0; iy < g.n_y; ++iy)
        for (int ix = 0; ix < g.n_x; ++ix)
            out.at(ix, iy) = f(g.x(ix), g.y(iy));
    return out;
}

inline bool is_finite(const Field& f) {
    for (double v : f.values)
        if (!std::isfinite(v)) return false;
    return true;
}

// Midpoint quadrature; exact for cell averages, so discrete conservation
// statements hold to rounding.
inline double integrate(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_measure();
}

inline double average(const Field& f) { return integrate(f) / f.grid.measure(); }

inline double dot_l2(const Field& f, const Field& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * g.values[i];
    return s * f.grid.cell_measure();
}

inline double norm_l2(const Field& f) { return std::sqrt(dot_l2(f, f)); }

inline double norm_linf(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

// Five-point Laplacian with mirrored ghosts.  The mirrored boundary legs
// cancel in the row sums, so the discrete integral of the result is zero.
inline Field laplacian(const Field& f) {
    const Grid& g = f.grid;
    Field out{g, std::vector<double>(g.size())};
    const double ax = 1.0 / (g.h_x * g.h_x);
    const double ay = 1.0 / (g.h_y * g.h_y);
    for (int iy = 0; iy < g.n_y; ++iy) {
        for (int ix = 0; ix < g.n_x; ++ix) {
            const double c = f.at(ix, iy);
            const double xl = f.at(ix > 0 ? ix - 1 : 0, iy);
            const double xr = f.at(ix + 1 < g.n_x ? ix + 1 : g.n_x - 1, iy);
            const double yl = f.at(ix, iy > 0 ? iy - 1 : 0);
            const double yr = f.at(ix, iy + 1 < g.n_y ? iy + 1 : g.n_y - 1);
            out.at(ix, iy) = ax * (xl - 2.0 * c + xr) + ay * (yl - 2.0 * c + yr);
        }
    }
    return out;
}

// |∇f|² from centered differences with mirrored ghosts.
inline Field gradient_sq(const Field& f) {
    const Grid& g = f.grid;
    Field out{g, std::vector<double>(g.size())};
    const double cx = 1.0 / (2.0 * g.h_x);
    const double cy = 1.0 / (2.0 * g.h_y);
    for (int iy = 0; iy < g.n_y; ++iy) {
        for (int ix = 0; ix < g.n_x; ++ix) {
            const double gx = cx * (f.at(ix + 1 < g.n_x ? ix + 1 : g.n_x - 1, iy) -
                                    f.at(ix > 0 ? ix - 1 : 0, iy));
            const double gy = cy * (f.at(ix, iy + 1 < g.n_y ? iy + 1 : g.n_y - 1) -
                                    f.at(ix, iy > 0 ? iy - 1 : 0));
            out.at(ix, iy) = gx * gx + gy * gy;
        }
    }
    return out;
}

// Face-difference Dirichlet integral ∫|∇f|².  Summation by parts against
// `laplacian` is exact: (laplacian(f), g) = -sum of face products, so energy
// identities built on this integral have no spatial defect.  Mirrored ghosts
// make the boundary faces vanish.
inline double dirichlet_integral(const Field& f) {
    const Grid& g = f.grid;
    double sx = 0.0, sy = 0.0;
    for (int iy = 0; iy < g.n_y; ++iy)
        for (int ix = 0; ix + 1 < g.n_x; ++ix) {
            const double d = f.at(ix + 1, iy) - f.at(ix, iy);
            sx += d * d;
        }
    if (g.dim == 2)
        for (int iy = 0; iy + 1 < g.n_y; ++iy)
            for (int ix = 0; ix < g.n_x; ++ix) {
                const double d = f.at(ix, iy + 1) - f.at(ix, iy);
                sy += d * d;
            }
    return sx * g.h_y / g.h_x + sy * g.h_x / g.h_y;
}

// Componentwise centered gradient, needed by the interface diagnostics.
inline void gradient(const Field& f, Field& gx_out, Field& gy_out) {
    const Grid& g = f.grid;
    gx_out = Field{g, std::vector<double>(g.size())};
    gy_out = Field{g, std::vector<double>(g.size())};
    const double cx = 1.0 / (2.0 * g.h_x);
    const double cy = 1.0 / (2.0 * g.h_y);
    for (int iy = 0; iy < g.n_y; ++iy) {
        for (int ix = 0; ix < g.n_x; ++ix) {
            gx_out.at(ix, iy) = cx * (f.at(ix + 1 < g.n_x ? ix + 1 : g.n_x - 1, iy) -
                                      f.at(ix > 0 ? ix - 1 : 0, iy));
            gy_out.at(ix, iy) = cy * (f.at(ix, iy + 1 < g.n_y ? iy + 1 : g.n_y - 1) -
                                      f.at(ix, iy > 0 ? iy - 1 : 0));
        }
    }
}

} // namespace pftg

#endif
