#ifndef PFTG_STATE_HPP
#define PFTG_STATE_HPP

#include "pftg/grid.hpp"
#include "pftg/model.hpp"

namespace pftg {

// One time slice of the coupled system.  After a step, mu carries the scheme's
// own chemical potential; for fresh initial data it carries the continuum one.
struct State {
    double t = 0.0;
    Field phi;
    Field sigma;
    Field mu;
};

// mu = -eps Δphi + F'(phi)/eps with the discrete operators of the grid.
inline Field chemical_potential(const Field& phi, const ModelSpec& spec) {
    Field mu = laplacian(phi);
    const double eps = spec.epsilon;
    for (std::size_t i = 0; i < mu.values.size(); ++i)
        mu.values[i] = -eps * mu.values[i] + spec.potential.deriv(phi.values[i]) / eps;
    return mu;
}

inline State make_initial_state(const ModelSpec& spec, Field phi0, Field sigma0) {
    if (!(phi0.grid == sigma0.grid)) throw std::invalid_argument("make_initial_state: grid mismatch");
    if (!is_finite(phi0) || !is_finite(sigma0))
        throw std::invalid_argument("make_initial_state: fields must be finite");
    State s;
    s.t = 0.0;
    s.mu = chemical_potential(phi0, spec);
    s.phi = std::move(phi0);
    s.sigma = std::move(sigma0);
    return s;
}

} // namespace pftg

#endif
