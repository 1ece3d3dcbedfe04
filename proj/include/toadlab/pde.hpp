#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "toadlab/errors.hpp"
#include "toadlab/fronts.hpp"
#include "toadlab/grid.hpp"
#include "toadlab/phi.hpp"
#include "toadlab/spectral.hpp"
#include "toadlab/tradeoff.hpp"
#include "toadlab/tridiag.hpp"

namespace toadlab {

// Time integrator for the nonlocal Cauchy problem
//
//   n_t = theta n_xx + n_thetatheta + n (1 - m(theta) - rho),
//   rho(t,x) = integral of n over theta,
//
// on a truncated rectangle: Neumann in x at both ends, Neumann at the trait
// floor, homogeneous Dirichlet at theta_max. One step is Strang-split:
// half reaction (exact exponential, rho frozen at substep start), one
// Peaceman-Rachford ADI pass for the full diffusion (Crank-Nicolson sweeps,
// x first with per-row coefficient theta, then theta), half reaction with
// rho recomputed. The `linearized` toggle drops the rho term, which turns
// the run into the comparison super-solution.

struct SimConfig {
    GridSpec grid;
    TradeoffSpec tradeoff;
    double dt = 0.05;
    double t_final = 50.0;
    bool linearized = false;
    int snapshot_every = 100;   // steps between stored snapshots
    int monitor_every = 0;      // steps between front/monitor records; 0 = auto
    double C0 = 1.0;            // initial box height/extent
    double front_threshold = 1e-2;
    double rho_max_estimate = 3.0;
    bool reaction_enabled = true; // diagnostics only: pure-diffusion runs

    void validate() const {
        grid.validate();
        if (!(dt > 0.0) || !(t_final > 0.0)) throw config_error("sim: dt, t_final must be > 0");
        if (!(C0 > 0.0)) throw config_error("sim: C0 must be > 0");
        if (grid.theta_min + C0 > grid.theta_max || C0 > grid.x_max)
            throw config_error("sim: initial box not inside the grid");
        const double m_hi = eval_m(tradeoff, grid.theta_max);
        const double react_bound =
            0.9 / (1.0 + std::max(std::abs(1.0 - m_hi), 1.0) + rho_max_estimate);
        if (dt > react_bound)
            throw config_error("sim: dt violates the reaction stability bound " +
                               std::to_string(react_bound));
        if (dt > std::min(grid.dx(), grid.dtheta()))
            throw config_error("sim: dt violates the splitting bound min(dx, dtheta)");
    }
};

struct BoundMonitor {
    double time = 0.0;
    double sup_n = 0.0;
    double sup_rho = 0.0;
    double min_n = 0.0;
    double tail_ratio = 0.0; // max over theta >= theta_mid of n / Q_delta
};

struct RunResult {
    std::vector<Field2D> snapshots;
    std::vector<Density1D> rho_profiles; // at snapshot times
    FrontTrace fronts;
    std::vector<BoundMonitor> monitors;
    bool boundary_hit = false;
    double valid_until = 0.0; // last time before the front reached x_max
};

// Trapezoid rule over theta per x column.
inline Density1D rho(const Field2D& field) {
    const auto& g = field.grid;
    Density1D d;
    d.grid = g;
    d.time = field.time;
    d.values.assign(g.nx, 0.0);
    const double dth = g.dtheta();
    for (int j = 0; j < g.ntheta; ++j) {
        const double w = (j == 0 || j == g.ntheta - 1) ? 0.5 : 1.0;
        const double* row = &field.values[static_cast<std::size_t>(j) * g.nx];
        for (int i = 0; i < g.nx; ++i) d.values[i] += w * row[i] * dth;
    }
    return d;
}

class Simulator {
public:
    explicit Simulator(const SimConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        const auto& g = cfg_.grid;
        m_theta_.resize(g.ntheta);
        for (int j = 0; j < g.ntheta; ++j) m_theta_[j] = eval_m(cfg_.tradeoff, g.theta(j));
        kappa_x_.resize(g.ntheta);
        const double dx2 = g.dx() * g.dx();
        for (int j = 0; j < g.ntheta; ++j)
            kappa_x_[j] = 0.5 * cfg_.dt * g.theta(j) / dx2;
        kappa_t_ = 0.5 * cfg_.dt / (g.dtheta() * g.dtheta());
        field_ = make_initial();
    }

    const SimConfig& config() const { return cfg_; }
    const Field2D& state() const { return field_; }
    Field2D& state() { return field_; }

    // Initial datum: C0 on {x <= C0} x {theta <= theta_min + C0}, smoothed by
    // one diffusion half-step, then cut to zero outside a 3-cell collar of the
    // box (the raw indicator rings under Crank-Nicolson).
    Field2D make_initial() {
        const auto& g = cfg_.grid;
        Field2D f(g, 0.0);
        for (int j = 0; j < g.ntheta; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.x(i) <= cfg_.C0 && g.theta(j) <= g.theta_min + cfg_.C0)
                    f.at(i, j) = cfg_.C0;
        diffuse(f, 0.5 * cfg_.dt);
        const double x_cut = cfg_.C0 + 3.0 * g.dx();
        const double th_cut = g.theta_min + cfg_.C0 + 3.0 * g.dtheta();
        for (int j = 0; j < g.ntheta; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.x(i) > x_cut || g.theta(j) > th_cut) f.at(i, j) = 0.0;
        f.time = 0.0;
        return f;
    }

    // One Strang step in place.
    void advance() {
        reaction_half(field_);
        diffuse(field_, cfg_.dt);
        reaction_half(field_);
        field_.time += cfg_.dt;
        ++step_index_;
        if (!std::isfinite(field_.values[sentinel_]))
            throw numeric_error("pde step " + std::to_string(step_index_) +
                                ": non-finite value detected");
    }

    BoundMonitor monitor() {
        ensure_tail_profile();
        const auto& g = cfg_.grid;
        BoundMonitor b;
        b.time = field_.time;
        b.min_n = field_.values[0];
        for (double v : field_.values) {
            b.sup_n = std::max(b.sup_n, v);
            b.min_n = std::min(b.min_n, v);
        }
        const Density1D r = rho(field_);
        for (double v : r.values) b.sup_rho = std::max(b.sup_rho, v);
        const int j_mid = g.ntheta / 2;
        for (int j = j_mid; j < g.ntheta - 1; ++j) {
            const double q = tail_profile_[j];
            if (q <= 0.0) continue;
            const double* row = &field_.values[static_cast<std::size_t>(j) * g.nx];
            for (int i = 0; i < g.nx; ++i)
                b.tail_ratio = std::max(b.tail_ratio, row[i] / q);
        }
        if (!std::isfinite(b.sup_n))
            throw numeric_error("pde step " + std::to_string(step_index_) +
                                ": non-finite value detected");
        return b;
    }

    long step_index() const { return step_index_; }

private:
    void reaction_half(Field2D& f) {
        if (!cfg_.reaction_enabled) return;
        const auto& g = cfg_.grid;
        const double half = 0.5 * cfg_.dt;
        const Density1D r = rho(f);
        for (int j = 0; j < g.ntheta - 1; ++j) {
            double* row = &f.values[static_cast<std::size_t>(j) * g.nx];
            const double base = 1.0 - m_theta_[j];
            for (int i = 0; i < g.nx; ++i) {
                const double rate = cfg_.linearized ? base : base - r.values[i];
                row[i] *= std::exp(half * rate);
            }
        }
    }

    // One Peaceman-Rachford pass over time `tau`:
    //   (I - kx Dx) u* = (I + kt Dt) u,   (I - kt Dt) u** = (I + kx Dx) u*.
    void diffuse(Field2D& f, double tau) {
        const auto& g = cfg_.grid;
        const double scale = tau / cfg_.dt; // kappas were built for dt
        const int nx = g.nx, nt = g.ntheta;
        work_.assign(f.values.size(), 0.0);

        // rhs = (I + kt Dt) u, theta sweep applied explicitly.
        for (int j = 0; j < nt - 1; ++j) {
            const double kt = kappa_t_ * scale;
            const double* row = &f.values[static_cast<std::size_t>(j) * nx];
            const double* up = &f.values[static_cast<std::size_t>(j + 1) * nx];
            const double* dn = (j > 0) ? &f.values[static_cast<std::size_t>(j - 1) * nx] : up;
            double* out = &work_[static_cast<std::size_t>(j) * nx];
            for (int i = 0; i < nx; ++i)
                out[i] = row[i] + kt * (dn[i] - 2.0 * row[i] + up[i]);
        }

        // x-implicit solves per theta row.
        sub_.assign(nx, 0.0);
        diag_.assign(nx, 0.0);
        sup_.assign(nx, 0.0);
        for (int j = 0; j < nt - 1; ++j) {
            const double kx = kappa_x_[j] * scale;
            for (int i = 0; i < nx; ++i) {
                sub_[i] = -kx;
                diag_[i] = 1.0 + 2.0 * kx;
                sup_[i] = -kx;
            }
            sup_[0] = -2.0 * kx;
            sub_[nx - 1] = -2.0 * kx;
            rhs_.assign(&work_[static_cast<std::size_t>(j) * nx],
                        &work_[static_cast<std::size_t>(j) * nx] + nx);
            tridiag_solve(sub_, diag_, sup_, rhs_, sol_, scratch_);
            std::copy(sol_.begin(), sol_.end(), &work_[static_cast<std::size_t>(j) * nx]);
        }

        // rhs2 = (I + kx Dx) u*, x sweep applied explicitly (into f).
        for (int j = 0; j < nt - 1; ++j) {
            const double kx = kappa_x_[j] * scale;
            const double* row = &work_[static_cast<std::size_t>(j) * nx];
            double* out = &f.values[static_cast<std::size_t>(j) * nx];
            for (int i = 0; i < nx; ++i) {
                const double left = (i > 0) ? row[i - 1] : row[1];
                const double right = (i + 1 < nx) ? row[i + 1] : row[nx - 2];
                out[i] = row[i] + kx * (left - 2.0 * row[i] + right);
            }
        }

        // theta-implicit solves per x column.
        const int nu = nt - 1;
        const double kt = kappa_t_ * scale;
        sub_.assign(nu, -kt);
        diag_.assign(nu, 1.0 + 2.0 * kt);
        sup_.assign(nu, -kt);
        sup_[0] = -2.0 * kt;
        rhs_.resize(nu);
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < nu; ++j)
                rhs_[j] = f.values[static_cast<std::size_t>(j) * nx + i];
            tridiag_solve(sub_, diag_, sup_, rhs_, sol_, scratch_);
            for (int j = 0; j < nu; ++j)
                f.values[static_cast<std::size_t>(j) * nx + i] = sol_[j];
        }

        // Crank-Nicolson sweeps are not sign preserving; clip the rounding-level
        // undershoots so the exponential reaction keeps the state nonnegative.
        for (double& v : f.values) v = std::max(v, 0.0);
        // Dirichlet row stays pinned.
        std::fill(f.values.begin() + static_cast<std::size_t>(nt - 1) * nx, f.values.end(), 0.0);
    }

    void ensure_tail_profile() {
        if (!tail_profile_.empty()) return;
        const auto& g = cfg_.grid;
        // Q_delta with delta = 1/2: ground state of the (1 - m/2) operator on
        // the simulation truncation; the evolving tails stay below a multiple
        // of it, which is what the tail ratio tracks. Solved on a refinement
        // of the theta grid so coarse simulation grids still work.
        const int refine = std::max(1, (64 + g.ntheta - 2) / (g.ntheta - 1));
        const int n_fine = refine * (g.ntheta - 1) + 1;
        const EigenPair q = principal_eigenpair(
            [&](double th) { return 1.0 - 0.5 * eval_m(cfg_.tradeoff, th); }, g.theta_min,
            g.theta_max - g.theta_min, n_fine);
        tail_profile_.resize(g.ntheta);
        for (int j = 0; j < g.ntheta; ++j) tail_profile_[j] = q.eigenfunction[j * refine];
    }

    SimConfig cfg_;
    Field2D field_;
    std::vector<double> m_theta_, kappa_x_;
    double kappa_t_ = 0.0;
    std::vector<double> work_, sub_, diag_, sup_, rhs_, sol_, scratch_;
    std::vector<double> tail_profile_;
    long step_index_ = 0;
    std::size_t sentinel_ = 0;
};

// Single-step convenience wrapper matching the operation contract.
inline Field2D init_field(const SimConfig& cfg) { return Simulator(cfg).make_initial(); }

inline Field2D step(const Field2D& state, const SimConfig& cfg) {
    Simulator sim(cfg);
    sim.state() = state;
    sim.advance();
    return sim.state();
}

inline BoundMonitor monitor_bounds(const Field2D& state, const SimConfig& cfg) {
    Simulator sim(cfg);
    sim.state() = state;
    return sim.monitor();
}

// Integrate to t_final, recording snapshots, rho profiles, front positions
// and bound monitors. A front reaching within 10 dx of x_max sets the
// boundary_hit flag; results past valid_until are suspect.
inline RunResult run(const SimConfig& cfg) {
    Simulator sim(cfg);
    const auto& g = cfg.grid;
    RunResult out;
    out.fronts.threshold = cfg.front_threshold;
    const long n_steps = static_cast<long>(std::ceil(cfg.t_final / cfg.dt - 1e-12));
    const int monitor_every =
        cfg.monitor_every > 0 ? cfg.monitor_every
                              : std::max(1, static_cast<int>(std::round(0.5 / cfg.dt)));
    const double guard_x = g.x_max - 10.0 * g.dx();

    auto record_light = [&]() {
        const Density1D r = rho(sim.state());
        out.fronts.times.push_back(sim.state().time);
        out.fronts.x_front.push_back(front_position(r, cfg.front_threshold));
        out.fronts.theta_front.push_back(trait_front(sim.state(), cfg.front_threshold));
        out.monitors.push_back(sim.monitor());
        if (!out.boundary_hit) {
            const auto reach = front_position(r, 1e-3);
            if (reach && *reach >= guard_x) {
                out.boundary_hit = true;
            } else {
                out.valid_until = sim.state().time;
            }
        }
    };
    auto record_snapshot = [&]() {
        out.snapshots.push_back(sim.state());
        out.rho_profiles.push_back(rho(sim.state()));
    };

    record_light();
    record_snapshot();
    for (long s = 1; s <= n_steps; ++s) {
        sim.advance();
        if (s % monitor_every == 0 || s == n_steps) record_light();
        if (s % cfg.snapshot_every == 0 || s == n_steps) record_snapshot();
    }
    return out;
}

// theta_max advisory from the tail scale: 4 eta_1(t_final) above the floor.
// Returns empty when the trade-off has no eta (Zero) or the bound holds.
inline std::optional<std::string> grid_tail_warning(const SimConfig& cfg) {
    if (cfg.tradeoff.kind == TradeoffKind::Zero) return std::nullopt;
    PhiProfile prof(cfg.tradeoff);
    const double want = cfg.grid.theta_min + 4.0 * prof.eta1(cfg.t_final);
    if (cfg.grid.theta_max >= want) return std::nullopt;
    return "grid: theta_max = " + std::to_string(cfg.grid.theta_max) +
           " is below the tail scale theta_min + 4*eta_1(t_final) = " + std::to_string(want) +
           "; trait tails may feel the Dirichlet cut";
}

} // namespace toadlab
