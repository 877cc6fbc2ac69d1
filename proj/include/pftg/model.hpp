#ifndef PFTG_MODEL_HPP
#define PFTG_MODEL_HPP

// Scalar ingredients of the diffuse-interface tumour model: the double-well
// potential F, the proliferation function P (problem P), the interpolation
// function H (problem H), and the derived quantities used by the analysis
// diagnostics (surface tension θ, the interface transform W).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pftg/quadrature.hpp"

namespace pftg {

using ScalarFn = std::function<double(double)>;

// Double well with minima at ±1.  The split F = F_c + F_nc separates a convex
// part from a concave perturbation (used by stabilized time stepping).
// c_F, C_F bound F from below by c_F·|u|^p − C_F, cbar_F by cbar_F·(|u|−1)².
struct Potential {
    ScalarFn eval;
    ScalarFn deriv;
    ScalarFn deriv2;
    ScalarFn convex_part_deriv;
    ScalarFn nonconvex_part_deriv;
    double growth_exponent = 4.0;   // p in [3, 6)
    double delta0 = 0.3;            // hessian growth checked on |u| >= 1 - delta0
    double c_F = 0.0;
    double C_F = 0.0;
    double cbar_F = 0.0;
};

// Nonnegative proliferation with r-growth: P(u) <= C_P (1 + |u|^r) and a
// matching local Lipschitz bound with constant Cbar_P.
struct Proliferation {
    ScalarFn eval;
    double growth_exponent = 1.0;   // r in [1, p - 2]
    double C_P = 0.0;
    double Cbar_P = 0.0;
};

// Interpolation H: R -> [0, 1] weighting the nutrient consumption by phase.
// technical_constant, when set, is the claimed bound in H <= C·F/|F'| on the
// region where F' < 0; when unset the validator reports the empirical sup.
struct Interpolation {
    ScalarFn eval;
    double lipschitz = 1.0;
    std::optional<double> technical_constant;
};

enum class Problem { P, H };

inline Potential quartic_double_well(double scale = 1.0) {
    if (!(scale > 0.0)) throw std::invalid_argument("quartic_double_well: scale must be positive");
    Potential f;
    const double a = scale;
    f.eval   = [a](double u) { const double w = 1.0 - u * u; return 0.25 * a * w * w; };
    f.deriv  = [a](double u) { return a * (u * u * u - u); };
    f.deriv2 = [a](double u) { return a * (3.0 * u * u - 1.0); };
    // F_c = a(1/4 + u^4/4 + u^2/2), F_nc = -a u^2, so F_c'' = a(3u^2 + 1) > 0.
    f.convex_part_deriv    = [a](double u) { return a * (u * u * u + u); };
    f.nonconvex_part_deriv = [a](double u) { return -2.0 * a * u; };
    f.growth_exponent = 4.0;
    f.delta0 = 0.3;
    f.c_F = 0.125 * a;
    f.C_F = 0.25 * a;
    f.cbar_F = 0.25 * a;
    return f;
}

inline Proliferation linear_proliferation(double lambda0) {
    if (lambda0 < 0.0) throw std::invalid_argument("linear_proliferation: lambda0 must be nonnegative");
    Proliferation p;
    p.eval = [lambda0](double u) { return lambda0 * std::max(1.0 + u, 0.0); };
    p.growth_exponent = 1.0;
    p.C_P = lambda0;
    p.Cbar_P = lambda0;
    return p;
}

// Default interpolation ((1 - u^2)^+)^3: C^2 across ±1, vanishes at the pure
// phases fast enough for the technical bound H <= C·F/|F'| to hold.
inline Interpolation smooth_interpolation() {
    Interpolation h;
    h.eval = [](double u) {
        const double w = std::max(1.0 - u * u, 0.0);
        return w * w * w;
    };
    h.lipschitz = 96.0 / (25.0 * std::sqrt(5.0));
    return h;
}

// Textbook ramp 1 ∧ ((1 + u)/2)^+.  Kept as a validator test subject: it does
// not vanish at u = +1, so the technical bound fails there.
inline Interpolation ramp_interpolation() {
    Interpolation h;
    h.eval = [](double u) { return std::clamp(0.5 * (1.0 + u), 0.0, 1.0); };
    h.lipschitz = 0.5;
    return h;
}

inline Interpolation constant_interpolation(double value) {
    if (value < 0.0 || value > 1.0)
        throw std::invalid_argument("constant_interpolation: value must lie in [0, 1]");
    Interpolation h;
    h.eval = [value](double) { return value; };
    h.lipschitz = 0.0;
    return h;
}

// θ = ∫_{-1}^{1} sqrt(F(u)/2) du, the surface tension of the well.
inline double surface_tension(const Potential& pot, double abs_tol = 1e-12) {
    const auto& F = pot.eval;
    double theta;
    try {
        theta = integrate_adaptive([&F](double u) { return std::sqrt(0.5 * F(u)); },
                                   -1.0, 1.0, abs_tol);
    } catch (const std::domain_error&) {
        throw std::invalid_argument("surface_tension: potential is negative on [-1, 1]");
    }
    return theta;
}

// max of F over [-1, 1], located by dense sampling.
inline double well_interior_max(const Potential& pot, int n_samples = 10001) {
    double m = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double u = -1.0 + 2.0 * i / (n_samples - 1);
        m = std::max(m, pot.eval(u));
    }
    return m;
}

namespace detail {

// Integrand of W: sqrt(2·F~) with the quadratic continuation F~ = F ∧ (maxF + u²).
inline double w_integrand(const Potential& pot, double fmax, double u) {
    const double f = std::min(pot.eval(u), fmax + u * u);
    if (f < 0.0) throw std::domain_error("w_transform: potential is negative");
    return std::sqrt(2.0 * f);
}

} // namespace detail

// W(u) = ∫_{-1}^{u} sqrt(2·F~(r)) dr.  Strictly increasing with W(-1) = 0; the
// integrand degenerates quadratically at the wells, which gives the two-sided
// growth c|u−v|² <= |W(u) − W(v)| <= C|u−v|(1 + |u| + |v|).
inline double w_transform(const Potential& pot, double u, double abs_tol = 1e-12) {
    const double fmax = well_interior_max(pot);
    const auto g = [&pot, fmax](double r) { return detail::w_integrand(pot, fmax, r); };
    if (u >= -1.0) return integrate_adaptive(g, -1.0, u, abs_tol);
    return -integrate_adaptive(g, u, -1.0, abs_tol);
}

// Tabulated W for field-sized workloads.  Nodes carry cumulative Gauss-Legendre
// quadrature; evaluation interpolates linearly between nodes.
class WTable {
public:
    WTable() = default;

    WTable(const Potential& pot, double lo = -6.0, double hi = 6.0, double spacing = 1e-4)
        : lo_(lo) {
        if (!(hi > lo)) throw std::invalid_argument("WTable: empty range");
        n_ = static_cast<std::size_t>(std::ceil((hi - lo) / spacing)) + 1;
        h_ = (hi - lo) / static_cast<double>(n_ - 1);
        const double fmax = well_interior_max(pot);

        // 5 point Gauss-Legendre nodes on [-1, 1].
        static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                     0.5384693101056831, 0.9061798459386640};
        static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};

        values_.resize(n_);
        // Anchor the cumulative sum at u = -1 so W(-1) = 0 exactly.
        const std::size_t i_anchor = static_cast<std::size_t>(std::llround((-1.0 - lo_) / h_));
        std::vector<double> cell(n_ - 1);
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            const double a = lo_ + h_ * static_cast<double>(i);
            double s = 0.0;
            for (int q = 0; q < 5; ++q)
                s += gw[q] * detail::w_integrand(pot, fmax, a + 0.5 * h_ * (1.0 + gx[q]));
            cell[i] = 0.5 * h_ * s;
        }
        values_[i_anchor] = 0.0;
        for (std::size_t i = i_anchor; i + 1 < n_; ++i) values_[i + 1] = values_[i] + cell[i];
        for (std::size_t i = i_anchor; i > 0; --i) values_[i - 1] = values_[i] - cell[i - 1];
    }

    double operator()(double u) const {
        if (values_.empty()) throw std::logic_error("WTable: not built");
        const double x = (u - lo_) / h_;
        if (x <= 0.0) return values_.front();
        if (x >= static_cast<double>(n_ - 1)) return values_.back();
        const std::size_t i = static_cast<std::size_t>(x);
        const double t = x - static_cast<double>(i);
        return values_[i] * (1.0 - t) + values_[i + 1] * t;
    }

private:
    double lo_ = 0.0, h_ = 1.0;
    std::size_t n_ = 0;
    std::vector<double> values_;
};

struct HypothesisCheck {
    std::string id;
    bool pass = false;
    double witness = 0.0;   // sample at which the check was decided
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const HypothesisCheck& c) { return c.pass; });
    }
};

// Model of one initial-boundary value problem: exactly one of proliferation
// (problem P) or interpolation (problem H) is present.
struct ModelSpec {
    Problem problem = Problem::P;
    Potential potential;
    std::optional<Proliferation> proliferation;
    std::optional<Interpolation> interpolation;
    double epsilon = 0.04;
    double theta = 0.0;     // surface tension of `potential`, cached
    double L_x = 1.0;
    double L_y = 1.0;
    double T = 0.01;
};

inline ModelSpec make_model_spec(Problem problem, Potential potential,
                                 std::optional<Proliferation> proliferation,
                                 std::optional<Interpolation> interpolation,
                                 double epsilon, double L_x, double L_y, double T) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("ModelSpec: epsilon must be positive");
    if (!(L_x > 0.0) || !(L_y > 0.0)) throw std::invalid_argument("ModelSpec: domain lengths must be positive");
    if (!(T >= 0.0)) throw std::invalid_argument("ModelSpec: horizon must be nonnegative");
    if (problem == Problem::P && (!proliferation || interpolation))
        throw std::invalid_argument("ModelSpec: problem P takes a proliferation function and no interpolation");
    if (problem == Problem::H && (!interpolation || proliferation))
        throw std::invalid_argument("ModelSpec: problem H takes an interpolation function and no proliferation");
    ModelSpec spec;
    spec.problem = problem;
    spec.potential = std::move(potential);
    spec.proliferation = std::move(proliferation);
    spec.interpolation = std::move(interpolation);
    spec.epsilon = epsilon;
    spec.L_x = L_x;
    spec.L_y = L_y;
    spec.T = T;
    spec.theta = surface_tension(spec.potential);
    return spec;
}

// Samples every structural hypothesis on [lo, hi] and reports one entry per
// hypothesis.  Failures are reported, not thrown.
inline ValidationReport check_assumptions(const ModelSpec& spec, double lo = -3.0,
                                          double hi = 3.0, int n_samples = 10001) {
    if (n_samples < 100) throw std::invalid_argument("check_assumptions: need at least 100 samples");
    const Potential& F = spec.potential;
    ValidationReport rep;
    auto add = [&rep](std::string id, bool pass, double witness, std::string detail) {
        rep.checks.push_back({std::move(id), pass, witness, std::move(detail)});
    };
    auto sample = [&](int i) { return lo + (hi - lo) * i / (n_samples - 1); };

    // F nonnegative with zeros exactly at ±1.
    {
        bool ok = F.eval(1.0) < 1e-12 && F.eval(-1.0) < 1e-12;
        double wit = ok ? 1.0 : (F.eval(1.0) >= 1e-12 ? 1.0 : -1.0);
        double min_off = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_samples; ++i) {
            const double u = sample(i);
            const double f = F.eval(u);
            if (f < -1e-12) { ok = false; wit = u; break; }
            if (std::min(std::abs(u - 1.0), std::abs(u + 1.0)) > 0.05)
                min_off = std::min(min_off, f);
        }
        if (ok && !(min_off > 0.0)) { ok = false; wit = 0.0; }
        add("F-well", ok, wit, "F >= 0 with zeros only at u = ±1");
    }

    // Hessian growth: F''(u) >= c |u|^{p-2} for |u| >= 1 - delta0, some c > 0.
    {
        double inf_ratio = std::numeric_limits<double>::infinity();
        double wit = 1.0;
        for (int i = 0; i < n_samples; ++i) {
            const double u = sample(i);
            if (std::abs(u) < 1.0 - F.delta0) continue;
            const double ratio = F.deriv2(u) / std::pow(std::abs(u), F.growth_exponent - 2.0);
            if (ratio < inf_ratio) { inf_ratio = ratio; wit = u; }
        }
        add("F-hessian-growth", inf_ratio > 0.0, wit,
            "inf of F''(u)/|u|^{p-2} on |u| >= 1 - delta0 is " + std::to_string(inf_ratio));
    }

    // Split consistency: F' = F_c' + F_nc' pointwise.
    {
        bool ok = true;
        double wit = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const double u = sample(i);
            const double gap = std::abs(F.deriv(u) - F.convex_part_deriv(u) - F.nonconvex_part_deriv(u));
            if (gap > 1e-9 * (1.0 + std::abs(F.deriv(u)))) { ok = false; wit = u; break; }
        }
        add("F-split", ok, wit, "F' equals the sum of the split derivatives");
    }

    // Convex part curvature positive, concave part curvature bounded
    // (finite-difference slopes of the split derivatives).
    {
        const double du = (hi - lo) / (n_samples - 1);
        double inf_c = std::numeric_limits<double>::infinity(), wit_c = 0.0;
        double sup_nc = 0.0, wit_nc = 0.0;
        for (int i = 0; i + 1 < n_samples; ++i) {
            const double u = sample(i);
            const double um = u + 0.5 * du;
            const double slope_c = (F.convex_part_deriv(u + du) - F.convex_part_deriv(u)) / du;
            const double slope_nc = std::abs((F.nonconvex_part_deriv(u + du) - F.nonconvex_part_deriv(u)) / du);
            const double ratio = slope_c / (1.0 + std::pow(std::abs(um), F.growth_exponent - 2.0));
            if (ratio < inf_c) { inf_c = ratio; wit_c = um; }
            if (slope_nc > sup_nc) { sup_nc = slope_nc; wit_nc = um; }
        }
        add("F-convex-curvature", inf_c > 0.0, wit_c,
            "inf of F_c'' / (1 + |u|^{p-2}) is " + std::to_string(inf_c));
        add("F-concave-bounded", std::isfinite(sup_nc), wit_nc,
            "sup of |F_nc''| is " + std::to_string(sup_nc));
    }

    // Lower bounds with the claimed constants.
    {
        bool ok = true; double wit = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const double u = sample(i);
            if (F.eval(u) < F.c_F * std::pow(std::abs(u), F.growth_exponent) - F.C_F - 1e-12) {
                ok = false; wit = u; break;
            }
        }
        add("F-lower-p", ok, wit, "F(u) >= c_F |u|^p - C_F");
    }
    {
        bool ok = true; double wit = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const double u = sample(i);
            const double d = std::abs(u) - 1.0;
            if (F.eval(u) < F.cbar_F * d * d - 1e-12) { ok = false; wit = u; break; }
        }
        add("F-lower-quadratic", ok, wit, "F(u) >= cbar_F (|u| - 1)^2");
    }

    if (spec.proliferation) {
        const Proliferation& P = *spec.proliferation;
        bool nn = true; double wit_nn = 0.0;
        bool gr = true; double wit_gr = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const double u = sample(i);
            const double p = P.eval(u);
            if (p < -1e-14) { nn = false; wit_nn = u; }
            if (p > P.C_P * (1.0 + std::pow(std::abs(u), P.growth_exponent)) + 1e-12) {
                gr = false; wit_gr = u;
            }
        }
        add("P-nonnegative", nn, wit_nn, "P(u) >= 0");
        add("P-growth", gr, wit_gr, "P(u) <= C_P (1 + |u|^r)");

        bool lip = true; double wit_lip = 0.0;
        for (int i = 0; i + 7 < n_samples; i += 7) {
            const double u = sample(i);
            const double v = sample(i + 7);
            const double bound = P.Cbar_P * std::abs(u - v) *
                (1.0 + std::pow(std::abs(u), P.growth_exponent - 1.0) +
                       std::pow(std::abs(v), P.growth_exponent - 1.0));
            if (std::abs(P.eval(u) - P.eval(v)) > bound + 1e-10) { lip = false; wit_lip = u; break; }
        }
        add("P-lipschitz", lip, wit_lip, "|P(u) - P(v)| <= Cbar_P |u - v| (1 + |u|^{r-1} + |v|^{r-1})");

        const bool r_ok = P.growth_exponent >= 1.0 &&
                          P.growth_exponent <= F.growth_exponent - 2.0 + 1e-12;
        add("P-exponent", r_ok, P.growth_exponent, "growth exponent r lies in [1, p - 2]");
    }

    if (spec.interpolation) {
        const Interpolation& H = *spec.interpolation;
        bool rng = true; double wit_rng = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const double u = sample(i);
            const double h = H.eval(u);
            if (h < -1e-14 || h > 1.0 + 1e-14) { rng = false; wit_rng = u; break; }
        }
        add("H-range", rng, wit_rng, "H maps into [0, 1]");

        bool lip = true; double wit_lip = 0.0; double sup_slope = 0.0;
        const double du = (hi - lo) / (n_samples - 1);
        for (int i = 0; i + 1 < n_samples; ++i) {
            const double u = sample(i);
            const double slope = std::abs(H.eval(u + du) - H.eval(u)) / du;
            sup_slope = std::max(sup_slope, slope);
            if (slope > H.lipschitz + 1e-6) { lip = false; wit_lip = u; }
        }
        add("H-lipschitz", lip, wit_lip,
            "sampled slope sup " + std::to_string(sup_slope) + " vs declared " + std::to_string(H.lipschitz));

        // Technical bound H <= C·F/|F'| on {F' < 0}.  No fixed C exists in
        // general, so the validator estimates the sup of H·|F'|/F on a ladder
        // of samples accumulating at the wells: a finite sup settles, a
        // divergent one keeps growing as the ladder deepens.
        {
            double sup_shallow = 0.0, sup_deep = 0.0, sup_all = 0.0;
            double wit = 0.0;
            auto ratio_at = [&](double u) -> double {
                const double fp = F.deriv(u);
                if (!(fp < -1e-14)) return -1.0;
                const double f = std::max(F.eval(u), 1e-300);
                return H.eval(u) * (-fp) / f;
            };
            for (int i = 0; i < n_samples; ++i) {
                const double r = ratio_at(sample(i));
                if (r > sup_all) { sup_all = r; wit = sample(i); }
            }
            for (int k = 1; k <= 45; ++k) {
                const double step = std::ldexp(1.0, -k);
                for (double u : {1.0 - step, -1.0 - step, 1.0 + step}) {
                    const double r = ratio_at(u);
                    if (r > sup_all) { sup_all = r; wit = u; }
                    if (k <= 22) sup_shallow = std::max(sup_shallow, r);
                    else sup_deep = std::max(sup_deep, r);
                }
            }
            const bool diverges = !std::isfinite(sup_all) || sup_deep > 4.0 * sup_shallow + 1e-12;
            bool ok = !diverges;
            std::string det = "empirical sup of H|F'|/F on {F' < 0} is " + std::to_string(sup_all);
            if (H.technical_constant) {
                ok = ok && sup_all <= *H.technical_constant + 1e-9;
                det += ", declared bound " + std::to_string(*H.technical_constant);
            }
            if (diverges) det += " (diverging toward the wells)";
            add("H-technical", ok, wit, det);
        }
    }

    return rep;
}

enum class TimePrecheck { Ass1Holds, Ass2Holds, NeitherHolds };

// Smallness threshold on T·E0 under which the mass-confinement argument for
// problem P applies with margin (1 - c0)².
inline double ass1_threshold(double omega_measure, double c_F, double C_F, double C_P, double c0) {
    return omega_measure * c_F * (1.0 - c0) * (1.0 - c0) / (2.0 * C_P * (c_F + C_F));
}

// Confinement level reached at time T under the first smallness condition:
// |mean(phi)| stays below m0 = c0 + sqrt(2 T E0 C_P (c_F + C_F)/(|Omega| c_F)).
inline double mass_confinement_bound(double T, double E0, double c0, double omega_measure,
                                     double c_F, double C_F, double C_P) {
    return c0 + std::sqrt(2.0 * T * E0 * C_P * (c_F + C_F) / (omega_measure * c_F));
}

// Decides which smallness condition (if any) keeps the spatial mean of phi
// away from ±1 up to the horizon T for problem P.
inline TimePrecheck precheck_global_time(double T, double E0, double c0,
                                         std::optional<double> d0, double omega_measure,
                                         double c_F, double C_F, double C_P) {
    if (!(omega_measure > 0.0)) throw std::invalid_argument("precheck_global_time: domain measure must be positive");
    if (!(c_F > 0.0) || !(C_P > 0.0) || C_F < 0.0)
        throw std::invalid_argument("precheck_global_time: constants must be positive");
    if (!(T >= 0.0) || !(E0 >= 0.0)) throw std::invalid_argument("precheck_global_time: T and E0 must be nonnegative");
    const bool ass1 = c0 < 1.0 && T * E0 < ass1_threshold(omega_measure, c_F, C_F, C_P, c0);
    if (ass1) return TimePrecheck::Ass1Holds;
    const bool ass2 = d0 && *d0 < 1.0 && E0 < omega_measure * (1.0 - *d0) * (1.0 - *d0) / 2.0;
    if (ass2) return TimePrecheck::Ass2Holds;
    return TimePrecheck::NeitherHolds;
}

} // namespace pftg

#endif
