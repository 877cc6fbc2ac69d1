#ifndef PFTG_CSV_HPP
#define PFTG_CSV_HPP

// CSV serialization of traces and sweep reports.  Comma separator, '.'
// decimal point, mandatory header row, 17 significant digits so every binary64
// round-trips exactly.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "pftg/diagnostics.hpp"
#include "pftg/sweep.hpp"

namespace pftg {

inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const char* trace_csv_header() {
    return "t,E,half_sigma_l2,mass_phi,mass_sigma,mass_sum,diss_mu,diss_sigma,diss_source,"
           "eb_residual,disc_pos,mu_avg,mu_bound_rhs,qc_measure";
}

// One row per recorded time.  eb_residual is the cumulative balance defect,
// so the caller can stream rows as the trace grows.
inline std::string trace_csv_row(const DiagnosticsTrace& tr, std::size_t i) {
    const double balance0 = tr.energy_values.front() + tr.half_sigma_l2.front();
    const double residual = tr.energy_values[i] + tr.half_sigma_l2[i] + tr.diss_mu[i] +
                            tr.diss_sigma[i] + tr.diss_source[i] - balance0 -
                            tr.coupling_work[i];
    std::string row = csv_number(tr.times[i]);
    for (double v : {tr.energy_values[i], tr.half_sigma_l2[i], tr.mass_phi[i],
                     tr.mass_sigma[i], tr.mass_sum[i], tr.diss_mu[i], tr.diss_sigma[i],
                     tr.diss_source[i], residual, tr.disc_pos[i], tr.mu_avg[i],
                     tr.mu_bound_rhs[i], tr.qc[i]})
        row += "," + csv_number(v);
    return row;
}

inline void write_trace_csv(const std::string& path, const DiagnosticsTrace& tr) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
    out << trace_csv_header() << "\n";
    for (std::size_t i = 0; i < tr.size(); ++i) out << trace_csv_row(tr, i) << "\n";
}

inline const char* sweep_csv_header() {
    return "epsilon,n_x,n_y,dt,n_steps,energy_initial,energy_final,combined_initial,"
           "ratio_initial,ratio_final,curves_final,w_distance,gt_residual,max_disc_ratio,"
           "mass_initial,mass_final,mass_abs_max,mass_sum_drift,mass_rate_max,"
           "critical_time,holder_chi,holder_phi";
}

inline std::string sweep_csv_row(const SweepRow& r) {
    std::string row = csv_number(r.epsilon);
    row += "," + std::to_string(r.n_x);
    row += "," + std::to_string(r.n_y);
    row += "," + csv_number(r.dt);
    row += "," + std::to_string(r.n_steps);
    for (double v : {r.energy_initial, r.energy_final, r.combined_initial, r.ratio_initial,
                     r.ratio_final})
        row += "," + csv_number(v);
    row += "," + std::to_string(r.curves_final);
    for (double v : {r.w_distance, r.gt_residual, r.max_disc_ratio, r.mass_initial,
                     r.mass_final, r.mass_abs_max, r.mass_sum_drift, r.mass_rate_max,
                     r.critical_time, r.holder_chi, r.holder_phi})
        row += "," + csv_number(v);
    return row;
}

inline void write_sweep_csv(const std::string& path, const SweepReport& rep) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
    out << sweep_csv_header() << "\n";
    for (const SweepRow& r : rep.rows) out << sweep_csv_row(r) << "\n";
}

} // namespace pftg

#endif
