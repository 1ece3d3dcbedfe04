#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "toadlab/errors.hpp"
#include "toadlab/hash.hpp"
#include "toadlab/pde.hpp"
#include "toadlab/tradeoff.hpp"

namespace toadlab {

// Plain-text run configuration, INI-style sections:
//
//   [tradeoff]            kind = powerlaw | logpower | linearplus | zero | tabulated
//   C, p, mu, theta_min   family parameters
//   knots = 1:0, 2:0.5    (tabulated only, "theta:m" pairs)
//
//   [grid]     x_min, x_max, theta_max, nx, ntheta
//   [sim]      dt, t_final, snapshot_every, linearized, C0, front_threshold
//   [spectral] b, N, tol
//   [fronts]   threshold, fit_lo_frac, fit_hi_frac
//   [action]   M, restarts, t, x, theta, a_bar, c_fit
//   [output]   dir, plots
//
// Unknown keys are rejected; missing keys fall back to defaults. The raw file
// text is hashed and stamped into every output header.

struct SpectralConfig {
    double b = 40.0;
    int N = 2048;
    double tol = 1e-7;
};

struct FrontsConfig {
    double threshold = 1e-2;
    double fit_lo_frac = 0.4; // window start as a fraction of the horizon
    double fit_hi_frac = 1.0;
};

struct ActionConfig {
    int M = 200;
    int restarts = 3;
    double t = 10.0;
    double x = 40.0;
    double theta = 0.0; // 0 = trait floor
    double a_bar = 1.0;
    double c_fit = 0.5;
};

struct OutputConfig {
    std::string dir = "out";
    bool plots = false;
};

struct RunConfig {
    SimConfig sim;
    SpectralConfig spectral;
    FrontsConfig fronts;
    ActionConfig action;
    OutputConfig output;
    std::string hash; // of the raw config text
    std::string source_path;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("config: bad boolean for " + key + ": " + v);
}

inline std::vector<std::pair<double, double>> parse_knots(const std::string& v) {
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw config_error("config: knots need theta:m pairs");
        knots.emplace_back(std::stod(trim(item.substr(0, colon))),
                           std::stod(trim(item.substr(colon + 1))));
    }
    return knots;
}

} // namespace detail

inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "") {
    RunConfig cfg;
    cfg.hash = fnv1a_hex(text);
    cfg.source_path = origin;

    // tradeoff assembly state
    std::string kind = "powerlaw";
    double C = 1.0, p = 1.0, mu = 1.0, theta_min = 1.0;
    std::vector<std::pair<double, double>> knots;

    std::string section;
    std::stringstream stream(text);
    std::string line;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const auto hashpos = line.find('#');
        if (hashpos != std::string::npos) line = line.substr(0, hashpos);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config line " + std::to_string(lineno) + ": bad section");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        auto num = [&]() { return std::stod(val); };

        if (section == "tradeoff") {
            if (key == "kind") kind = val;
            else if (key == "C") C = num();
            else if (key == "p") p = num();
            else if (key == "mu") mu = num();
            else if (key == "theta_min") theta_min = num();
            else if (key == "knots") knots = detail::parse_knots(val);
            else throw config_error("config: unknown tradeoff key " + key);
        } else if (section == "grid") {
            if (key == "x_min") cfg.sim.grid.x_min = num();
            else if (key == "x_max") cfg.sim.grid.x_max = num();
            else if (key == "theta_max") cfg.sim.grid.theta_max = num();
            else if (key == "nx") cfg.sim.grid.nx = static_cast<int>(num());
            else if (key == "ntheta") cfg.sim.grid.ntheta = static_cast<int>(num());
            else throw config_error("config: unknown grid key " + key);
        } else if (section == "sim") {
            if (key == "dt") cfg.sim.dt = num();
            else if (key == "t_final") cfg.sim.t_final = num();
            else if (key == "snapshot_every") cfg.sim.snapshot_every = static_cast<int>(num());
            else if (key == "monitor_every") cfg.sim.monitor_every = static_cast<int>(num());
            else if (key == "linearized") cfg.sim.linearized = detail::parse_bool(val, key);
            else if (key == "C0") cfg.sim.C0 = num();
            else if (key == "front_threshold") cfg.sim.front_threshold = num();
            else if (key == "rho_max_estimate") cfg.sim.rho_max_estimate = num();
            else throw config_error("config: unknown sim key " + key);
        } else if (section == "spectral") {
            if (key == "b") cfg.spectral.b = num();
            else if (key == "N") cfg.spectral.N = static_cast<int>(num());
            else if (key == "tol") cfg.spectral.tol = num();
            else throw config_error("config: unknown spectral key " + key);
        } else if (section == "fronts") {
            if (key == "threshold") cfg.fronts.threshold = num();
            else if (key == "fit_lo_frac") cfg.fronts.fit_lo_frac = num();
            else if (key == "fit_hi_frac") cfg.fronts.fit_hi_frac = num();
            else throw config_error("config: unknown fronts key " + key);
        } else if (section == "action") {
            if (key == "M") cfg.action.M = static_cast<int>(num());
            else if (key == "restarts") cfg.action.restarts = static_cast<int>(num());
            else if (key == "t") cfg.action.t = num();
            else if (key == "x") cfg.action.x = num();
            else if (key == "theta") cfg.action.theta = num();
            else if (key == "a_bar") cfg.action.a_bar = num();
            else if (key == "c_fit") cfg.action.c_fit = num();
            else throw config_error("config: unknown action key " + key);
        } else if (section == "output") {
            if (key == "dir") cfg.output.dir = val;
            else if (key == "plots") cfg.output.plots = detail::parse_bool(val, key);
            else throw config_error("config: unknown output key " + key);
        } else {
            throw config_error("config line " + std::to_string(lineno) + ": unknown section [" +
                               section + "]");
        }
    }

    if (kind == "powerlaw") cfg.sim.tradeoff = TradeoffSpec::power_law(C, p, theta_min);
    else if (kind == "logpower") cfg.sim.tradeoff = TradeoffSpec::log_power(C, p, theta_min);
    else if (kind == "linearplus") cfg.sim.tradeoff = TradeoffSpec::linear_plus(mu, theta_min);
    else if (kind == "zero") cfg.sim.tradeoff = TradeoffSpec::zero(theta_min);
    else if (kind == "tabulated") cfg.sim.tradeoff = TradeoffSpec::tabulated(knots);
    else throw config_error("config: unknown tradeoff kind " + kind);
    cfg.sim.grid.theta_min = cfg.sim.tradeoff.theta_min;
    if (cfg.action.theta <= 0.0) cfg.action.theta = cfg.sim.tradeoff.theta_min;
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

} // namespace toadlab
