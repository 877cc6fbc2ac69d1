#ifndef PFTG_DIAGNOSTICS_HPP
#define PFTG_DIAGNOSTICS_HPP

// Observables of the sharp-interface analysis: the Ginzburg-Landau energy and
// its balance, the positive discrepancy, the W-transform distance to the
// two-phase limit, the chemical-potential mean bound, the stress tensor
// identity, interface extraction with curvature, and Hölder time regularity.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>

#include "pftg/grid.hpp"
#include "pftg/model.hpp"
#include "pftg/state.hpp"

namespace pftg {

// ---------------------------------------------------------------------------
// Scalar observables

// E = ∫ eps/2 |∇phi|² + F(phi)/eps.  The gradient term uses the face-based
// Dirichlet integral, the exact summation-by-parts partner of the scheme's
// Laplacian, so the recorded energy obeys the discrete balance up to O(dt)
// with no spatial floor.
inline double energy(const Field& phi, const ModelSpec& spec) {
    double well = 0.0;
    for (double v : phi.values) well += spec.potential.eval(v);
    well *= phi.grid.cell_measure() / spec.epsilon;
    return 0.5 * spec.epsilon * dirichlet_integral(phi) + well;
}

// ∫ (eps/2 |∇phi|² - F(phi)/eps)^+, the part of the energy density where the
// gradient term dominates the well term.
inline double discrepancy_positive(const Field& phi, const ModelSpec& spec) {
    const Field gsq = gradient_sq(phi);
    double s = 0.0;
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        const double xi = 0.5 * spec.epsilon * gsq.values[i] -
                          spec.potential.eval(phi.values[i]) / spec.epsilon;
        if (xi > 0.0) s += xi;
    }
    return s * phi.grid.cell_measure();
}

// Phase-measure of the tumour region {phi > 0} by cell counting.
inline double qc_measure(const Field& phi) {
    std::size_t count = 0;
    for (double v : phi.values)
        if (v > 0.0) ++count;
    return static_cast<double>(count) * phi.grid.cell_measure();
}

// 0/1 indicator of the tumour region, as a field.
inline Field phase_indicator(const Field& phi) {
    Field out{phi.grid, std::vector<double>(phi.grid.size())};
    for (std::size_t i = 0; i < phi.values.size(); ++i)
        out.values[i] = phi.values[i] > 0.0 ? 1.0 : 0.0;
    return out;
}

inline Field w_field(const Field& phi, const WTable& table) {
    Field out{phi.grid, std::vector<double>(phi.grid.size())};
    for (std::size_t i = 0; i < phi.values.size(); ++i) out.values[i] = table(phi.values[i]);
    return out;
}

// L¹ distance of W(phi) to its sharp-interface limit 2θ·χ_{phi>0}.
inline double w_distance_to_limit(const Field& phi, const ModelSpec& spec, const WTable& table) {
    const double twot = 2.0 * spec.theta;
    double s = 0.0;
    for (double v : phi.values)
        s += std::abs(table(v) - (v > 0.0 ? twot : 0.0));
    return s * phi.grid.cell_measure();
}

struct MuAverageCheck {
    double mu_avg = 0.0;        // |mean of mu|
    double bound_scale = 0.0;   // E + ||∇mu||_2, the quantity controlling it
};

// The mean of mu is controlled by C(E + ||∇mu||_2) only while the mean of phi
// stays strictly inside (-1, 1); outside that regime the check is undefined.
inline MuAverageCheck mu_average_check(const State& state, const ModelSpec& spec) {
    const double phi_mean = average(state.phi);
    if (!(std::abs(phi_mean) < 1.0))
        throw std::invalid_argument("mu_average_check: mean of phi is not strictly inside (-1, 1)");
    MuAverageCheck out;
    out.mu_avg = std::abs(average(state.mu));
    out.bound_scale = energy(state.phi, spec) + std::sqrt(dirichlet_integral(state.mu));
    return out;
}

// ---------------------------------------------------------------------------
// Trace recording

// Scalar history of a run.  The diss_* entries are running trapezoid
// integrals; inst_* keeps the integrands so refinement of the record stride
// refines the quadrature consistently.
struct DiagnosticsTrace {
    Problem problem = Problem::P;
    double omega_measure = 0.0;
    double cell_measure = 0.0;

    std::vector<double> times;
    std::vector<double> energy_values;
    std::vector<double> half_sigma_l2;
    std::vector<double> mass_phi, mass_sigma, mass_sum;
    std::vector<double> diss_mu, diss_sigma, diss_source;
    std::vector<double> coupling_work;          // problem H source work, zero for P
    std::vector<double> disc_pos;
    std::vector<double> mu_avg, mu_bound_rhs;
    std::vector<double> qc;

    std::vector<double> inst_grad_mu, inst_grad_sigma, inst_source, inst_coupling;

    std::size_t size() const { return times.size(); }
};

inline DiagnosticsTrace make_trace(const ModelSpec& spec, const Grid& grid) {
    DiagnosticsTrace tr;
    tr.problem = spec.problem;
    tr.omega_measure = grid.measure();
    tr.cell_measure = grid.cell_measure();
    return tr;
}

inline void append_state(DiagnosticsTrace& tr, const State& state, const ModelSpec& spec) {
    const Grid& g = state.phi.grid;
    const double cm = g.cell_measure();

    tr.times.push_back(state.t);
    tr.energy_values.push_back(energy(state.phi, spec));
    tr.half_sigma_l2.push_back(0.5 * dot_l2(state.sigma, state.sigma));
    tr.mass_phi.push_back(average(state.phi));
    tr.mass_sigma.push_back(average(state.sigma));
    tr.mass_sum.push_back(tr.mass_phi.back() + tr.mass_sigma.back());
    tr.disc_pos.push_back(discrepancy_positive(state.phi, spec));
    tr.qc.push_back(qc_measure(state.phi));

    // Face-based gradients keep the pairing with the update stencil exact.
    const double grad_mu = dirichlet_integral(state.mu);
    const double grad_sigma = dirichlet_integral(state.sigma);
    double source = 0.0, coupling = 0.0;
    if (spec.problem == Problem::P) {
        const auto& P = spec.proliferation->eval;
        for (std::size_t i = 0; i < state.phi.values.size(); ++i) {
            const double d = state.sigma.values[i] - state.mu.values[i];
            source += P(state.phi.values[i]) * d * d;
        }
        source *= cm;
    } else {
        const auto& H = spec.interpolation->eval;
        for (std::size_t i = 0; i < state.phi.values.size(); ++i) {
            const double h = H(state.phi.values[i]);
            source += h * state.sigma.values[i] * state.sigma.values[i];
            coupling += state.mu.values[i] * (state.sigma.values[i] - 1.0) * h;
        }
        source *= cm;
        coupling *= cm;
    }

    tr.mu_avg.push_back(std::abs(average(state.mu)));
    tr.mu_bound_rhs.push_back(tr.energy_values.back() + std::sqrt(grad_mu));

    tr.inst_grad_mu.push_back(grad_mu);
    tr.inst_grad_sigma.push_back(grad_sigma);
    tr.inst_source.push_back(source);
    tr.inst_coupling.push_back(coupling);

    const std::size_t k = tr.times.size() - 1;
    if (k == 0) {
        tr.diss_mu.push_back(0.0);
        tr.diss_sigma.push_back(0.0);
        tr.diss_source.push_back(0.0);
        tr.coupling_work.push_back(0.0);
    } else {
        const double dt = tr.times[k] - tr.times[k - 1];
        auto trap = [dt](const std::vector<double>& inst, std::size_t i) {
            return 0.5 * dt * (inst[i - 1] + inst[i]);
        };
        tr.diss_mu.push_back(tr.diss_mu[k - 1] + trap(tr.inst_grad_mu, k));
        tr.diss_sigma.push_back(tr.diss_sigma[k - 1] + trap(tr.inst_grad_sigma, k));
        tr.diss_source.push_back(tr.diss_source[k - 1] + trap(tr.inst_source, k));
        tr.coupling_work.push_back(tr.coupling_work[k - 1] + trap(tr.inst_coupling, k));
    }
}

// Defect of the energy balance relative to the initial record: zero for the
// exact flow, first order in dt for the stepped one.
inline std::vector<double> energy_balance_residual(const DiagnosticsTrace& tr) {
    std::vector<double> res(tr.size());
    if (tr.size() == 0) return res;
    const double start = tr.energy_values[0] + tr.half_sigma_l2[0];
    for (std::size_t i = 0; i < tr.size(); ++i) {
        res[i] = tr.energy_values[i] + tr.half_sigma_l2[i] + tr.diss_mu[i] + tr.diss_sigma[i] +
                 tr.diss_source[i] - start - tr.coupling_work[i];
    }
    return res;
}

// First recorded time at which the tumour phase measure leaves its admissible
// band (problem P: both phases present; problem H: tumour present), or the
// final recorded time if it never does.
inline double critical_time(const DiagnosticsTrace& tr) {
    if (tr.size() == 0) throw std::invalid_argument("critical_time: empty trace");
    const double half_cell = 0.5 * tr.cell_measure;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const bool tumour_present = tr.qc[i] > half_cell;
        const bool healthy_present = tr.qc[i] < tr.omega_measure - half_cell;
        const bool ok = tr.problem == Problem::P ? (tumour_present && healthy_present)
                                                 : tumour_present;
        if (!ok) return tr.times[i];
    }
    return tr.times.back();
}

// ---------------------------------------------------------------------------
// Hölder quotients

enum class SnapshotNorm { L1, L2 };

// max over recorded pairs of ||u(t) - u(s)|| / |t - s|^exponent.
inline double holder_quotient(const std::vector<double>& times, const std::vector<Field>& fields,
                              double exponent, SnapshotNorm norm) {
    if (times.size() != fields.size())
        throw std::invalid_argument("holder_quotient: times and snapshots must align");
    if (times.size() < 2) throw std::invalid_argument("holder_quotient: need at least two snapshots");
    double q = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t j = i + 1; j < times.size(); ++j) {
            const double dt = std::abs(times[j] - times[i]);
            if (dt == 0.0) continue;
            double d = 0.0;
            if (norm == SnapshotNorm::L1) {
                for (std::size_t k = 0; k < fields[i].values.size(); ++k)
                    d += std::abs(fields[j].values[k] - fields[i].values[k]);
                d *= fields[i].grid.cell_measure();
            } else {
                for (std::size_t k = 0; k < fields[i].values.size(); ++k) {
                    const double e = fields[j].values[k] - fields[i].values[k];
                    d += e * e;
                }
                d = std::sqrt(d * fields[i].grid.cell_measure());
            }
            q = std::max(q, d / std::pow(dt, exponent));
        }
    }
    return q;
}

// ---------------------------------------------------------------------------
// Stress tensor identity

namespace detail {

// C¹ bump on (-1, 1), zero outside; normalized to 1 at the center.
inline double bump(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

inline double bump_deriv(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double w = 1.0 - s * s;
    return bump(s) * (-2.0 * s / (w * w));
}

} // namespace detail

// Residual of ∫ ∇Y : (e·I - eps ∇phi ⊗ ∇phi) dx = ∫ phi (mu div Y + ∇mu · Y) dx
// over a family of compactly supported tensor-product bump fields Y, with mu
// recomputed from phi.  Normalized by the energy.  The test fields are
// differentiated with the same centred stencil as the solution fields, so
// ∫ div Y telescopes to zero and spatially constant states are annihilated
// exactly.
inline double stress_tensor_residual(const Field& phi, const ModelSpec& spec, int field_count = 6) {
    const Grid& g = phi.grid;
    if (g.dim != 2) throw std::invalid_argument("stress_tensor_residual: needs a 2d grid");
    if (field_count < 1) throw std::invalid_argument("stress_tensor_residual: need at least one test field");

    Field gx{g, {}}, gy{g, {}};
    gradient(phi, gx, gy);
    const Field mu = chemical_potential(phi, spec);
    Field mx{g, {}}, my{g, {}};
    gradient(mu, mx, my);

    const double L_x = g.length_x(), L_y = g.length_y();
    const double e_norm = std::max(energy(phi, spec), 1e-30);

    double worst = 0.0;
    for (int k = 0; k < field_count; ++k) {
        // Interior supports of varying position and width, alternating between
        // the two vector components.
        const double cx = L_x * (0.35 + 0.3 * ((k * 2654435761u % 97) / 96.0));
        const double cy = L_y * (0.35 + 0.3 * ((k * 40503u % 89) / 88.0));
        const double ax = 0.28 * L_x * (1.0 - 0.25 * (k % 3) / 2.0);
        const double ay = 0.28 * L_y * (1.0 - 0.25 * ((k + 1) % 3) / 2.0);
        const bool horizontal = (k % 2) == 0;

        // psi(x, y) = bump(sx) bump(sy), supported strictly inside the domain.
        const Field psi = make_field(g, [&](double x, double y) {
            return detail::bump((x - cx) / ax) * detail::bump((y - cy) / ay);
        });
        Field psi_x{g, {}}, psi_y{g, {}};
        gradient(psi, psi_x, psi_y);

        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < psi.values.size(); ++i) {
            // Y = (psi, 0) or (0, psi).
            const double y1 = horizontal ? psi.values[i] : 0.0;
            const double y2 = horizontal ? 0.0 : psi.values[i];
            const double y1x = horizontal ? psi_x.values[i] : 0.0;
            const double y1y = horizontal ? psi_y.values[i] : 0.0;
            const double y2x = horizontal ? 0.0 : psi_x.values[i];
            const double y2y = horizontal ? 0.0 : psi_y.values[i];

            const double px = gx.values[i], py = gy.values[i];
            const double ed = 0.5 * spec.epsilon * (px * px + py * py) +
                              spec.potential.eval(phi.values[i]) / spec.epsilon;
            lhs += y1x * (ed - spec.epsilon * px * px) + y2y * (ed - spec.epsilon * py * py) -
                   spec.epsilon * px * py * (y1y + y2x);
            rhs += phi.values[i] * (mu.values[i] * (y1x + y2y) +
                                    mx.values[i] * y1 + my.values[i] * y2);
        }
        worst = std::max(worst, std::abs(lhs - rhs) * g.cell_measure() / e_norm);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Interface extraction

struct InterfacePoint {
    double x = 0.0, y = 0.0;
    double kappa = 0.0;         // signed toward the tumour side
    bool kappa_valid = false;   // false near open-chain ends
};

struct InterfaceCurve {
    std::vector<InterfacePoint> points;
    bool closed = false;
    double length = 0.0;
};

// Bilinear sample of a cell-centered field with constant extension past the
// outermost centers.
inline double sample_bilinear(const Field& f, double x, double y) {
    const Grid& g = f.grid;
    const double u = x / g.h_x - 0.5;
    const double v = g.dim == 2 ? y / g.h_y - 0.5 : 0.0;
    const int i0 = std::clamp(static_cast<int>(std::floor(u)), 0, std::max(g.n_x - 2, 0));
    const int j0 = std::clamp(static_cast<int>(std::floor(v)), 0, std::max(g.n_y - 2, 0));
    const double a = std::clamp(u - i0, 0.0, 1.0);
    const double b = std::clamp(v - j0, 0.0, 1.0);
    const int i1 = std::min(i0 + 1, g.n_x - 1);
    const int j1 = std::min(j0 + 1, g.n_y - 1);
    return (1.0 - a) * (1.0 - b) * f.at(i0, j0) + a * (1.0 - b) * f.at(i1, j0) +
           (1.0 - a) * b * f.at(i0, j1) + a * b * f.at(i1, j1);
}

namespace detail {

struct MsSegment {
    std::int64_t key_a, key_b;
    double ax, ay, bx, by;
};

// Curvature of the circle fitted through a short window of points.  Nearly
// collinear windows report zero curvature.
inline double circle_fit_curvature(const std::vector<std::array<double, 2>>& pts) {
    const std::size_t n = pts.size();
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) { mx += p[0]; my += p[1]; }
    mx /= n; my /= n;
    double suu = 0, suv = 0, svv = 0, suuu = 0, svvv = 0, suvv = 0, svuu = 0;
    double span = 0.0;
    for (const auto& p : pts) {
        const double u = p[0] - mx, v = p[1] - my;
        suu += u * u; suv += u * v; svv += v * v;
        suuu += u * u * u; svvv += v * v * v;
        suvv += u * v * v; svuu += v * u * u;
        span = std::max(span, u * u + v * v);
    }
    const double det = suu * svv - suv * suv;
    if (det <= 1e-12 * span * span * n * n) return 0.0;
    const double rx = 0.5 * (suuu + suvv);
    const double ry = 0.5 * (svvv + svuu);
    const double ucx = (rx * svv - ry * suv) / det;
    const double ucy = (ry * suu - rx * suv) / det;
    const double r2 = ucx * ucx + ucy * ucy + (suu + svv) / n;
    if (!(r2 > 0.0)) return 0.0;
    return 1.0 / std::sqrt(r2);
}

inline std::array<double, 2> circle_fit_center(const std::vector<std::array<double, 2>>& pts) {
    const std::size_t n = pts.size();
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) { mx += p[0]; my += p[1]; }
    mx /= n; my /= n;
    double suu = 0, suv = 0, svv = 0, suuu = 0, svvv = 0, suvv = 0, svuu = 0;
    for (const auto& p : pts) {
        const double u = p[0] - mx, v = p[1] - my;
        suu += u * u; suv += u * v; svv += v * v;
        suuu += u * u * u; svvv += v * v * v;
        suvv += u * v * v; svuu += v * u * u;
    }
    const double det = suu * svv - suv * suv;
    if (det == 0.0) return {mx, my};
    const double rx = 0.5 * (suuu + suvv);
    const double ry = 0.5 * (svvv + svuu);
    return {mx + (rx * svv - ry * suv) / det, my + (ry * suu - rx * suv) / det};
}

} // namespace detail

// Marching squares on the cell-center samples of phi at level zero, chained
// into polylines; curvature from an osculating-circle fit over a five-segment
// window, signed positive when the curve bends around the tumour phase.
inline std::vector<InterfaceCurve> extract_interface(const Field& phi) {
    const Grid& g = phi.grid;
    if (g.dim != 2) throw std::invalid_argument("extract_interface: needs a 2d grid");

    auto inside = [&](int ix, int iy) { return phi.at(ix, iy) > 0.0; };
    auto cross = [&](int ax, int ay, int bx, int by, double& px, double& py) {
        const double fa = phi.at(ax, ay), fb = phi.at(bx, by);
        const double t = fa / (fa - fb);
        px = g.x(ax) + t * (g.x(bx) - g.x(ax));
        py = g.y(ay) + t * (g.y(by) - g.y(ay));
    };
    // Vertex keys on grid edges: horizontal edges tagged 0, vertical tagged 1.
    auto hkey = [&](int ix, int iy) { return (static_cast<std::int64_t>(iy) * g.n_x + ix) * 2; };
    auto vkey = [&](int ix, int iy) { return (static_cast<std::int64_t>(iy) * g.n_x + ix) * 2 + 1; };

    std::vector<detail::MsSegment> segments;
    for (int iy = 0; iy + 1 < g.n_y; ++iy) {
        for (int ix = 0; ix + 1 < g.n_x; ++ix) {
            const int code = (inside(ix, iy) ? 1 : 0) | (inside(ix + 1, iy) ? 2 : 0) |
                             (inside(ix + 1, iy + 1) ? 4 : 0) | (inside(ix, iy + 1) ? 8 : 0);
            if (code == 0 || code == 15) continue;
            // Local edges: 0 bottom, 1 right, 2 top, 3 left.
            std::array<std::int64_t, 4> keys = {hkey(ix, iy), vkey(ix + 1, iy),
                                                hkey(ix, iy + 1), vkey(ix, iy)};
            std::array<double, 4> ex{}, ey{};
            auto edge_point = [&](int e) {
                switch (e) {
                    case 0: cross(ix, iy, ix + 1, iy, ex[0], ey[0]); break;
                    case 1: cross(ix + 1, iy, ix + 1, iy + 1, ex[1], ey[1]); break;
                    case 2: cross(ix, iy + 1, ix + 1, iy + 1, ex[2], ey[2]); break;
                    default: cross(ix, iy, ix, iy + 1, ex[3], ey[3]); break;
                }
            };
            auto emit = [&](int e1, int e2) {
                edge_point(e1);
                edge_point(e2);
                segments.push_back({keys[e1], keys[e2], ex[e1], ey[e1], ex[e2], ey[e2]});
            };
            switch (code) {
                case 1: emit(3, 0); break;
                case 2: emit(0, 1); break;
                case 4: emit(1, 2); break;
                case 8: emit(2, 3); break;
                case 3: emit(3, 1); break;
                case 12: emit(3, 1); break;
                case 6: emit(0, 2); break;
                case 9: emit(0, 2); break;
                case 7: emit(2, 3); break;
                case 11: emit(1, 2); break;
                case 13: emit(0, 1); break;
                case 14: emit(3, 0); break;
                case 5: {
                    const double center = 0.25 * (phi.at(ix, iy) + phi.at(ix + 1, iy) +
                                                  phi.at(ix, iy + 1) + phi.at(ix + 1, iy + 1));
                    if (center > 0.0) { emit(0, 1); emit(2, 3); }
                    else { emit(3, 0); emit(1, 2); }
                    break;
                }
                case 10: {
                    const double center = 0.25 * (phi.at(ix, iy) + phi.at(ix + 1, iy) +
                                                  phi.at(ix, iy + 1) + phi.at(ix + 1, iy + 1));
                    if (center > 0.0) { emit(3, 0); emit(1, 2); }
                    else { emit(0, 1); emit(2, 3); }
                    break;
                }
                default: break;
            }
        }
    }
    if (segments.empty())
        throw std::invalid_argument("extract_interface: phi has no sign change");

    // Chain segments through shared edge vertices.
    std::map<std::int64_t, std::vector<std::size_t>> touching;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        touching[segments[s].key_a].push_back(s);
        touching[segments[s].key_b].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);
    std::vector<InterfaceCurve> curves;

    auto walk = [&](std::size_t start, std::int64_t from_key) {
        InterfaceCurve curve;
        std::size_t s = start;
        std::int64_t key = from_key;
        while (true) {
            used[s] = true;
            const detail::MsSegment& seg = segments[s];
            const bool forward = seg.key_a == key;
            const double px = forward ? seg.ax : seg.bx;
            const double py = forward ? seg.ay : seg.by;
            if (curve.points.empty()) curve.points.push_back({px, py, 0.0, false});
            const double qx = forward ? seg.bx : seg.ax;
            const double qy = forward ? seg.by : seg.ay;
            curve.points.push_back({qx, qy, 0.0, false});
            key = forward ? seg.key_b : seg.key_a;
            const auto& nbrs = touching[key];
            std::size_t next = s;
            for (std::size_t cand : nbrs)
                if (!used[cand]) { next = cand; break; }
            if (next == s) break;
            s = next;
        }
        // Closed when the walk returned to its starting vertex.
        const auto& first = curve.points.front();
        const auto& last = curve.points.back();
        if (std::abs(first.x - last.x) < 1e-12 && std::abs(first.y - last.y) < 1e-12 &&
            curve.points.size() > 3) {
            curve.closed = true;
            curve.points.pop_back();
        }
        return curve;
    };

    // Open chains first (vertices of degree one), then remaining loops.
    for (const auto& [key, segs] : touching) {
        if (segs.size() != 1) continue;
        const std::size_t s = segs.front();
        if (!used[s]) curves.push_back(walk(s, key));
    }
    for (std::size_t s = 0; s < segments.size(); ++s)
        if (!used[s]) curves.push_back(walk(s, segments[s].key_a));

    // Curvature per point from a smoothed window of neighbors.
    for (InterfaceCurve& curve : curves) {
        const std::size_t m = curve.points.size();
        std::vector<std::array<double, 2>> smooth(m);
        for (std::size_t i = 0; i < m; ++i) {
            if (curve.closed || (i > 0 && i + 1 < m)) {
                const auto& a = curve.points[(i + m - 1) % m];
                const auto& b = curve.points[i];
                const auto& c = curve.points[(i + 1) % m];
                smooth[i] = {0.25 * a.x + 0.5 * b.x + 0.25 * c.x,
                             0.25 * a.y + 0.5 * b.y + 0.25 * c.y};
            } else {
                smooth[i] = {curve.points[i].x, curve.points[i].y};
            }
        }
        const int half = 3;   // window of 2*half points spans five segments
        for (std::size_t i = 0; i < m; ++i) {
            if (!curve.closed && (i < static_cast<std::size_t>(half) || i + half >= m)) continue;
            std::vector<std::array<double, 2>> window;
            for (int o = -half; o <= half - 1; ++o)
                window.push_back(smooth[(i + m + o) % m]);
            double kappa = detail::circle_fit_curvature(window);
            if (kappa != 0.0) {
                const auto center = detail::circle_fit_center(window);
                if (sample_bilinear(phi, center[0], center[1]) < 0.0) kappa = -kappa;
            }
            curve.points[i].kappa = kappa;
            curve.points[i].kappa_valid = true;
        }
        double len = 0.0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const double dx = curve.points[i + 1].x - curve.points[i].x;
            const double dy = curve.points[i + 1].y - curve.points[i].y;
            len += std::sqrt(dx * dx + dy * dy);
        }
        if (curve.closed) {
            const double dx = curve.points.front().x - curve.points.back().x;
            const double dy = curve.points.front().y - curve.points.back().y;
            len += std::sqrt(dx * dx + dy * dy);
        }
        curve.length = len;
    }
    return curves;
}

inline double total_interface_length(const std::vector<InterfaceCurve>& curves) {
    double s = 0.0;
    for (const auto& c : curves) s += c.length;
    return s;
}

// Median of |mu - θ·kappa| over the interface samples, mu interpolated
// bilinearly onto the curve.
inline double gibbs_thomson_residual(const std::vector<InterfaceCurve>& curves, const Field& mu,
                                     double theta) {
    std::vector<double> residuals;
    for (const auto& curve : curves)
        for (const auto& p : curve.points)
            if (p.kappa_valid)
                residuals.push_back(std::abs(sample_bilinear(mu, p.x, p.y) - theta * p.kappa));
    if (residuals.empty())
        throw std::invalid_argument("gibbs_thomson_residual: no curvature samples");
    const std::size_t mid = residuals.size() / 2;
    std::nth_element(residuals.begin(), residuals.begin() + mid, residuals.end());
    return residuals[mid];
}

inline double median_curvature(const std::vector<InterfaceCurve>& curves) {
    std::vector<double> ks;
    for (const auto& curve : curves)
        for (const auto& p : curve.points)
            if (p.kappa_valid) ks.push_back(p.kappa);
    if (ks.empty()) throw std::invalid_argument("median_curvature: no curvature samples");
    const std::size_t mid = ks.size() / 2;
    std::nth_element(ks.begin(), ks.begin() + mid, ks.end());
    return ks[mid];
}

} // namespace pftg

#endif
