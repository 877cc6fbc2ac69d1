#ifndef PFTG_CONFIG_HPP
#define PFTG_CONFIG_HPP

// Line-oriented `key = value` run configuration.  Sections [model] [grid]
// [time] [sweep] [output] group the keys; keys before any section header are
// accepted wherever they belong.  `#` starts a comment.  Parsing is strict:
// unknown keys, type mismatches and misplaced keys fail with a line number,
// constraint violations fail naming the key.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pftg/sweep.hpp"

namespace pftg {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // [model]
    Problem problem = Problem::P;
    double epsilon = 0.04;
    double lambda0 = 0.5;               // proliferation scale, problem P
    std::string interpolation = "smooth";  // problem H: smooth | ramp
    double well_scale = 1.0;            // multiplies the quartic well

    // [grid]
    int dim = 2;
    int n_x = 0, n_y = 0;               // 0 = derive from h_ratio
    double L_x = 1.0, L_y = 1.0;
    double h_ratio = 6.0;               // ρ in the resolution rule n = ceil(L·ρ/ε)

    // [time]
    double T = 1e-3;
    double dt = 0.0;                    // 0 = derive dt = c_dt·ε³
    double c_dt = 0.5;
    double stabilization = 2.0;

    // [sweep]
    std::vector<double> epsilons;
    std::string geometry = "circle";    // circle | stripe | circles
    double circle_x = 0.5, circle_y = 0.5, radius = 0.25;
    std::string circles;                // "cx cy r ; cx cy r ; ..."
    double stripe_position = 0.5;
    double sigma0 = -1.0;               // resolved default: 0.8 for P, 1.0 for H
    std::optional<double> sigma0_inside;
    int holder_intervals = 16;

    // [output]
    std::string out_dir = "out";
    int snapshot_stride = 0;            // 0 = final snapshot only
    int trace_stride = 1;
    unsigned long seed = 0;
    int threads = 1;
};

namespace detail {

inline std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline ConfigError line_error(int line, const std::string& msg) {
    return ConfigError("config line " + std::to_string(line) + ": " + msg);
}

inline double parse_double(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw line_error(line, "key '" + key + "' expects a number, got '" + v + "'");
    }
}

inline long parse_long(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw line_error(line, "key '" + key + "' expects an integer, got '" + v + "'");
    }
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key, int line) {
    std::istringstream in(v);
    std::vector<double> out;
    double x;
    while (in >> x) out.push_back(x);
    if (!in.eof() || out.empty())
        throw line_error(line, "key '" + key + "' expects a space-separated number list");
    return out;
}

inline void require(bool ok, const std::string& key, const std::string& constraint) {
    if (!ok) throw ConfigError("config: key '" + key + "' " + constraint);
}

// %.17g: shortest text that round-trips a binary64 exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    // key -> owning section
    static const std::map<std::string, std::string> key_section = {
        {"problem", "model"},        {"epsilon", "model"},
        {"lambda0", "model"},        {"interpolation", "model"},
        {"well_scale", "model"},
        {"dim", "grid"},             {"n_x", "grid"},
        {"n_y", "grid"},             {"L_x", "grid"},
        {"L_y", "grid"},             {"h_ratio", "grid"},
        {"T", "time"},               {"dt", "time"},
        {"c_dt", "time"},            {"stabilization", "time"},
        {"epsilons", "sweep"},       {"geometry", "sweep"},
        {"circle_x", "sweep"},       {"circle_y", "sweep"},
        {"radius", "sweep"},         {"circles", "sweep"},
        {"stripe_position", "sweep"}, {"sigma0", "sweep"},
        {"sigma0_inside", "sweep"},  {"holder_intervals", "sweep"},
        {"out_dir", "output"},       {"snapshot_stride", "output"},
        {"trace_stride", "output"},  {"seed", "output"},
        {"threads", "output"},
    };

    RunConfig cfg;
    bool sigma0_given = false;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::string s = detail::strip(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw detail::line_error(line, "unterminated section header");
            section = detail::strip(s.substr(1, s.size() - 2));
            if (section != "model" && section != "grid" && section != "time" &&
                section != "sweep" && section != "output")
                throw detail::line_error(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw detail::line_error(line, "expected 'key = value', got '" + s + "'");
        const std::string key = detail::strip(s.substr(0, eq));
        const std::string value = detail::strip(s.substr(eq + 1));
        const auto owner = key_section.find(key);
        if (owner == key_section.end())
            throw detail::line_error(line, "unknown key '" + key + "'");
        if (!section.empty() && section != owner->second)
            throw detail::line_error(line,
                                     "key '" + key + "' belongs to [" + owner->second + "]");
        if (value.empty()) throw detail::line_error(line, "key '" + key + "' has no value");

        if (key == "problem") {
            if (value == "P") cfg.problem = Problem::P;
            else if (value == "H") cfg.problem = Problem::H;
            else throw detail::line_error(line, "key 'problem' expects P or H");
        } else if (key == "epsilon") {
            cfg.epsilon = detail::parse_double(value, key, line);
        } else if (key == "lambda0") {
            cfg.lambda0 = detail::parse_double(value, key, line);
        } else if (key == "interpolation") {
            if (value != "smooth" && value != "ramp")
                throw detail::line_error(line, "key 'interpolation' expects smooth or ramp");
            cfg.interpolation = value;
        } else if (key == "well_scale") {
            cfg.well_scale = detail::parse_double(value, key, line);
        } else if (key == "dim") {
            cfg.dim = static_cast<int>(detail::parse_long(value, key, line));
        } else if (key == "n_x") {
            cfg.n_x = static_cast<int>(detail::parse_long(value, key, line));
        } else if (key == "n_y") {
            cfg.n_y = static_cast<int>(detail::parse_long(value, key, line));
        } else if (key == "L_x") {
            cfg.L_x = detail::parse_double(value, key, line);
        } else if (key == "L_y") {
            cfg.L_y = detail::parse_double(value, key, line);
        } else if (key == "h_ratio") {
            cfg.h_ratio = detail::parse_double(value, key, line);
        } else if (key == "T") {
            cfg.T = detail::parse_double(value, key, line);
        } else if (key == "dt") {
            cfg.dt = detail::parse_double(value, key, line);
        } else if (key == "c_dt") {
            cfg.c_dt = detail::parse_double(value, key, line);
        } else if (key == "stabilization") {
            cfg.stabilization = detail::parse_double(value, key, line);
        } else if (key == "epsilons") {
            cfg.epsilons = detail::parse_list(value, key, line);
        } else if (key == "geometry") {
            if (value != "circle" && value != "stripe" && value != "circles")
                throw detail::line_error(line,
                                         "key 'geometry' expects circle, stripe or circles");
            cfg.geometry = value;
        } else if (key == "circle_x") {
            cfg.circle_x = detail::parse_double(value, key, line);
        } else if (key == "circle_y") {
            cfg.circle_y = detail::parse_double(value, key, line);
        } else if (key == "radius") {
            cfg.radius = detail::parse_double(value, key, line);
        } else if (key == "circles") {
            cfg.circles = value;
        } else if (key == "stripe_position") {
            cfg.stripe_position = detail::parse_double(value, key, line);
        } else if (key == "sigma0") {
            cfg.sigma0 = detail::parse_double(value, key, line);
            sigma0_given = true;
        } else if (key == "sigma0_inside") {
            cfg.sigma0_inside = detail::parse_double(value, key, line);
        } else if (key == "holder_intervals") {
            cfg.holder_intervals = static_cast<int>(detail::parse_long(value, key, line));
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "snapshot_stride") {
            cfg.snapshot_stride = static_cast<int>(detail::parse_long(value, key, line));
        } else if (key == "trace_stride") {
            cfg.trace_stride = static_cast<int>(detail::parse_long(value, key, line));
        } else if (key == "seed") {
            cfg.seed = static_cast<unsigned long>(detail::parse_long(value, key, line));
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(detail::parse_long(value, key, line));
        }
    }

    if (!sigma0_given) cfg.sigma0 = cfg.problem == Problem::P ? 0.8 : 1.0;

    // Constraint layer: every key validated before any computation.
    using detail::require;
    require(cfg.epsilon > 0.0, "epsilon", "must be positive");
    require(cfg.lambda0 >= 0.0, "lambda0", "must be nonnegative");
    require(cfg.well_scale > 0.0, "well_scale", "must be positive");
    require(cfg.dim == 1 || cfg.dim == 2, "dim", "must be 1 or 2");
    require(cfg.n_x >= 0, "n_x", "must be nonnegative (0 derives it)");
    require(cfg.n_y >= 0, "n_y", "must be nonnegative (0 derives it)");
    require(cfg.L_x > 0.0, "L_x", "must be positive");
    require(cfg.L_y > 0.0, "L_y", "must be positive");
    require(cfg.h_ratio >= 1.0, "h_ratio", "must be at least 1");
    require(cfg.T > 0.0, "T", "must be positive");
    require(cfg.dt >= 0.0, "dt", "must be nonnegative (0 derives it)");
    require(cfg.c_dt > 0.0, "c_dt", "must be positive");
    require(cfg.stabilization >= 0.0, "stabilization", "must be nonnegative");
    for (double e : cfg.epsilons) require(e > 0.0, "epsilons", "entries must be positive");
    require(cfg.radius > 0.0, "radius", "must be positive");
    require(cfg.sigma0 >= 0.0 && cfg.sigma0 <= 1.0, "sigma0", "must lie in [0, 1]");
    if (cfg.sigma0_inside)
        require(*cfg.sigma0_inside >= 0.0 && *cfg.sigma0_inside <= 1.0, "sigma0_inside",
                "must lie in [0, 1]");
    require(cfg.holder_intervals >= 1, "holder_intervals", "must be positive");
    require(cfg.snapshot_stride >= 0, "snapshot_stride", "must be nonnegative");
    require(cfg.trace_stride >= 1, "trace_stride", "must be positive");
    require(cfg.threads >= 1, "threads", "must be positive");
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Bridges to the library types

inline ModelSpec to_model_spec(const RunConfig& cfg, double epsilon) {
    if (cfg.problem == Problem::P)
        return make_model_spec(Problem::P, quartic_double_well(cfg.well_scale),
                               linear_proliferation(cfg.lambda0), std::nullopt, epsilon,
                               cfg.L_x, cfg.L_y, cfg.T);
    Interpolation h = cfg.interpolation == "ramp" ? ramp_interpolation()
                                                  : smooth_interpolation();
    return make_model_spec(Problem::H, quartic_double_well(cfg.well_scale), std::nullopt,
                           std::move(h), epsilon, cfg.L_x, cfg.L_y, cfg.T);
}

inline ModelSpec to_model_spec(const RunConfig& cfg) { return to_model_spec(cfg, cfg.epsilon); }

inline Geometry to_geometry(const RunConfig& cfg) {
    if (cfg.geometry == "circle")
        return circle_geometry(cfg.circle_x, cfg.circle_y, cfg.radius);
    if (cfg.geometry == "stripe") return stripe_geometry(cfg.stripe_position);
    std::vector<CircleSpec> list;
    std::istringstream in(cfg.circles);
    std::string part;
    while (std::getline(in, part, ';')) {
        std::istringstream triple(part);
        CircleSpec c;
        if (!(triple >> c.cx >> c.cy >> c.radius))
            throw ConfigError("config: key 'circles' expects 'cx cy r ; cx cy r ; ...'");
        double extra;
        if (triple >> extra)
            throw ConfigError("config: key 'circles' expects 'cx cy r ; cx cy r ; ...'");
        list.push_back(c);
    }
    try {
        return circles_geometry(std::move(list));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: key 'circles' invalid: ") + e.what());
    }
}

inline StepConfig to_step_config(const RunConfig& cfg) {
    StepConfig step;
    step.s = cfg.stabilization;
    return step;
}

inline int derived_cells(double L, double rho, double epsilon) {
    return static_cast<int>(std::ceil(L * rho / epsilon));
}

// Number of steps covering [0, T]: dt is rounded down so it divides T.
inline int derived_steps(const RunConfig& cfg, double epsilon) {
    const double nominal = cfg.dt > 0.0 ? cfg.dt : cfg.c_dt * epsilon * epsilon * epsilon;
    return std::max(1, static_cast<int>(std::ceil(cfg.T / nominal)));
}

inline Grid to_grid(const RunConfig& cfg, double epsilon) {
    const int nx = cfg.n_x > 0 ? cfg.n_x : derived_cells(cfg.L_x, cfg.h_ratio, epsilon);
    if (cfg.dim == 1) return make_grid_1d(nx, cfg.L_x);
    const int ny = cfg.n_y > 0 ? cfg.n_y : derived_cells(cfg.L_y, cfg.h_ratio, epsilon);
    return make_grid_2d(nx, ny, cfg.L_x, cfg.L_y);
}

inline SweepPlan to_sweep_plan(const RunConfig& cfg) {
    if (cfg.epsilons.empty())
        throw ConfigError("config: key 'epsilons' is required for a sweep");
    SweepPlan plan;
    plan.base = to_model_spec(cfg, cfg.epsilons.front());
    plan.epsilons = cfg.epsilons;
    plan.geometry = to_geometry(cfg);
    plan.sigma0 = Sigma0{cfg.sigma0, cfg.sigma0_inside};
    plan.rho = cfg.h_ratio;
    plan.c_dt = cfg.c_dt;
    plan.step = to_step_config(cfg);
    plan.holder_intervals = cfg.holder_intervals;
    return plan;
}

// Canonical echo of a fully resolved configuration, including the grids and
// steps the sweep rules derive.  Output re-parses to the same configuration.
inline std::string dump_config(const RunConfig& cfg) {
    using detail::format_double;
    std::ostringstream out;
    out << "[model]\n";
    out << "problem = " << (cfg.problem == Problem::P ? "P" : "H") << "\n";
    out << "epsilon = " << format_double(cfg.epsilon) << "\n";
    if (cfg.problem == Problem::P)
        out << "lambda0 = " << format_double(cfg.lambda0) << "\n";
    else
        out << "interpolation = " << cfg.interpolation << "\n";
    out << "well_scale = " << format_double(cfg.well_scale) << "\n";
    out << "\n[grid]\n";
    out << "dim = " << cfg.dim << "\n";
    out << "n_x = " << cfg.n_x << "\n";
    out << "n_y = " << cfg.n_y << "\n";
    out << "L_x = " << format_double(cfg.L_x) << "\n";
    out << "L_y = " << format_double(cfg.L_y) << "\n";
    out << "h_ratio = " << format_double(cfg.h_ratio) << "\n";
    out << "\n[time]\n";
    out << "T = " << format_double(cfg.T) << "\n";
    out << "dt = " << format_double(cfg.dt) << "\n";
    out << "c_dt = " << format_double(cfg.c_dt) << "\n";
    out << "stabilization = " << format_double(cfg.stabilization) << "\n";
    out << "\n[sweep]\n";
    if (!cfg.epsilons.empty()) {
        out << "epsilons =";
        for (double e : cfg.epsilons) out << " " << format_double(e);
        out << "\n";
    }
    out << "geometry = " << cfg.geometry << "\n";
    if (cfg.geometry == "circle") {
        out << "circle_x = " << format_double(cfg.circle_x) << "\n";
        out << "circle_y = " << format_double(cfg.circle_y) << "\n";
        out << "radius = " << format_double(cfg.radius) << "\n";
    } else if (cfg.geometry == "stripe") {
        out << "stripe_position = " << format_double(cfg.stripe_position) << "\n";
    } else {
        out << "circles = " << cfg.circles << "\n";
    }
    out << "sigma0 = " << format_double(cfg.sigma0) << "\n";
    if (cfg.sigma0_inside)
        out << "sigma0_inside = " << format_double(*cfg.sigma0_inside) << "\n";
    out << "holder_intervals = " << cfg.holder_intervals << "\n";
    out << "\n[output]\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    out << "snapshot_stride = " << cfg.snapshot_stride << "\n";
    out << "trace_stride = " << cfg.trace_stride << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "threads = " << cfg.threads << "\n";

    const auto echo = [&](double eps) {
        const int steps = derived_steps(cfg, eps);
        out << "# derived: epsilon " << format_double(eps) << " -> n_x "
            << (cfg.n_x > 0 ? cfg.n_x : derived_cells(cfg.L_x, cfg.h_ratio, eps)) << ", n_y "
            << (cfg.n_y > 0 ? cfg.n_y : derived_cells(cfg.L_y, cfg.h_ratio, eps)) << ", dt "
            << format_double(cfg.T / steps) << ", steps " << steps << "\n";
    };
    out << "\n";
    if (cfg.epsilons.empty()) {
        echo(cfg.epsilon);
    } else {
        for (double e : cfg.epsilons) echo(e);
    }
    return out.str();
}

} // namespace pftg

#endif
