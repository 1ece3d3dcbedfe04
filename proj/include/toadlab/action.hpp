#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "toadlab/errors.hpp"
#include "toadlab/phi.hpp"
#include "toadlab/spectral.hpp"
#include "toadlab/tradeoff.hpp"

namespace toadlab {

// Action of the space-trait Lagrangian
//
//   zeta(t, x, theta) = inf over paths Z = (Z1, Z2) from (0, theta_min) to
//   (x, theta) of  integral( |Z1'|^2 / (4 Z2) + |Z2'|^2 / 4 + m(Z2) ) ds.
//
// The Euler-Lagrange equations conserve Z1' / (2 Z2), so Z1 is slaved to the
// trait path: with alpha = x / (2 integral Z2), the action reduces to
//
//   zeta = x^2 / (4 integral Z2) + integral( |Z2'|^2 / 4 + m(Z2) ) ds,
//
// an optimization over the trait path alone, run here as projected spectral
// gradient descent with the bound constraint Z2 >= theta_min and three
// structurally distinct starts (the reduced objective is non-convex for
// sub-linear m).

struct Trajectory {
    std::vector<double> times; // M+1 uniform nodes on [0, t]
    std::vector<double> z1;    // space
    std::vector<double> z2;    // trait, >= theta_min
    double action = 0.0;
};

// Midpoint-rule discrete action of a stored path.
inline double action_of_trajectory(const Trajectory& traj, const TradeoffSpec& spec) {
    const std::size_t n = traj.times.size();
    if (n < 2 || traj.z1.size() != n || traj.z2.size() != n)
        throw std::domain_error("action_of_trajectory: malformed trajectory");
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double ds = traj.times[k + 1] - traj.times[k];
        if (!(ds > 0.0)) throw std::domain_error("action_of_trajectory: times not increasing");
        if (traj.z2[k] < spec.theta_min || traj.z2[k + 1] < spec.theta_min)
            throw std::domain_error("action_of_trajectory: trait below floor");
        const double mid = 0.5 * (traj.z2[k] + traj.z2[k + 1]);
        const double d1 = traj.z1[k + 1] - traj.z1[k];
        const double d2 = traj.z2[k + 1] - traj.z2[k];
        total += d1 * d1 / (4.0 * mid * ds) + d2 * d2 / (4.0 * ds) + eval_m(spec, mid) * ds;
    }
    return total;
}

namespace detail {

struct ReducedProblem {
    const TradeoffSpec* spec = nullptr;
    double t = 1.0;
    double dx = 0.0; // total x displacement
    double floor = 1.0;
    int segments = 200;

    double ds() const { return t / segments; }
};

inline double reduced_objective(const ReducedProblem& p, const std::vector<double>& z,
                                std::vector<double>* grad) {
    const int M = p.segments;
    const double ds = p.ds();
    double integral_z = 0.0, kinetic = 0.0, mortality = 0.0;
    for (int k = 0; k < M; ++k) {
        const double mid = 0.5 * (z[k] + z[k + 1]);
        integral_z += mid * ds;
        const double dz = z[k + 1] - z[k];
        kinetic += dz * dz / (4.0 * ds);
        mortality += eval_m(*p.spec, mid) * ds;
    }
    const double xterm = p.dx * p.dx / (4.0 * integral_z);
    if (grad) {
        grad->assign(M + 1, 0.0);
        const double dI = -xterm / integral_z; // d(xterm)/dI
        for (int j = 1; j < M; ++j) {
            const double mid_lo = 0.5 * (z[j - 1] + z[j]);
            const double mid_hi = 0.5 * (z[j] + z[j + 1]);
            double g = dI * ds; // each neighbor midpoint moves by 1/2
            g += (2.0 * z[j] - z[j - 1] - z[j + 1]) / (2.0 * ds);
            g += 0.5 * ds * (eval_m_prime(*p.spec, mid_lo) + eval_m_prime(*p.spec, mid_hi));
            (*grad)[j] = g;
        }
    }
    return xterm + kinetic + mortality;
}

// Projected spectral gradient descent (Barzilai-Borwein steps, nonmonotone
// backtracking). Endpoints of z are fixed, interior nodes clipped to the
// floor. Returns true when the projected gradient meets the tolerance.
inline bool spg_minimize(const ReducedProblem& p, std::vector<double>& z, double tol,
                         int max_iter = 4000) {
    const int M = p.segments;
    auto project = [&](std::vector<double>& v) {
        for (int j = 1; j < M; ++j) v[j] = std::max(v[j], p.floor);
    };
    project(z);
    std::vector<double> grad, grad_new, z_new, trial;
    double f = reduced_objective(p, z, &grad);
    std::vector<double> fmem(8, f);
    double step = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        // projected gradient norm
        double pg = 0.0;
        for (int j = 1; j < M; ++j) {
            const double g =
                (z[j] <= p.floor + 1e-14) ? std::min(grad[j], 0.0) : grad[j];
            pg = std::max(pg, std::abs(g));
        }
        if (pg <= tol * (1.0 + std::abs(f))) return true;

        const double fmax = *std::max_element(fmem.begin(), fmem.end());
        double lambda = step;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            trial = z;
            for (int j = 1; j < M; ++j) trial[j] = z[j] - lambda * grad[j];
            project(trial);
            double decrease = 0.0;
            for (int j = 1; j < M; ++j) decrease += grad[j] * (trial[j] - z[j]);
            const double f_trial = reduced_objective(p, trial, nullptr);
            if (f_trial <= fmax + 1e-4 * decrease || decrease >= 0.0) {
                z_new = trial;
                f = f_trial;
                accepted = true;
                break;
            }
            lambda *= 0.3;
        }
        if (!accepted) return false;
        reduced_objective(p, z_new, &grad_new);
        // BB1 step from the accepted move
        double sts = 0.0, sty = 0.0;
        for (int j = 1; j < M; ++j) {
            const double s = z_new[j] - z[j];
            const double y = grad_new[j] - grad[j];
            sts += s * s;
            sty += s * y;
        }
        step = (sty > 1e-30) ? std::clamp(sts / sty, 1e-10, 1e10) : 1.0;
        z = z_new;
        grad = grad_new;
        fmem.erase(fmem.begin());
        fmem.push_back(f);
    }
    return false;
}

inline void make_rectangle(std::vector<double>& z, int M, double z_start, double z_end,
                           double level) {
    z.assign(M + 1, level);
    const int ramp = std::max(1, M / 6);
    z[0] = z_start;
    z[M] = z_end;
    for (int j = 1; j < ramp; ++j)
        z[j] = z_start + (level - z_start) * j / ramp;
    for (int j = 1; j < ramp; ++j)
        z[M - j] = z_end + (level - z_end) * j / ramp;
}

// Plateau height minimizing the rectangular up/plateau/down profile cost,
// found by a coarse log scan. Used to seed the optimizer.
inline double best_plateau(const ReducedProblem& p, double z_start, double z_end) {
    const double lo = p.floor;
    double hint = std::max({z_start, z_end, lo + 1e-3});
    // scale hint from the trade-off-free optimum h = (dx^2/4)^{1/3}
    hint = std::max(hint, std::cbrt(std::max(p.dx * p.dx / 4.0, 1e-12)));
    double best_h = hint, best_f = std::numeric_limits<double>::infinity();
    std::vector<double> z(p.segments + 1);
    for (double h = lo + 1e-3; h <= 64.0 * hint; h *= 1.3) {
        make_rectangle(z, p.segments, z_start, z_end, h);
        const double f = reduced_objective(p, z, nullptr);
        if (f < best_f) {
            best_f = f;
            best_h = h;
        }
    }
    return best_h;
}

} // namespace detail

struct MinimizeReport {
    Trajectory best;
    bool converged = false;
    std::vector<double> start_values; // objective reached from each start
};

// General-endpoint reduced minimization: path from (y, eta) at s=0 to
// (x, theta) at s=t. The public minimize_action wraps the default start
// (0, theta_min).
inline MinimizeReport minimize_action_path(const TradeoffSpec& spec, double t, double y,
                                           double eta_start, double x, double theta,
                                           int segments = 200, int restarts = 3) {
    if (!(t > 0.0)) throw std::domain_error("minimize_action: t must be > 0");
    if (theta < spec.theta_min || eta_start < spec.theta_min)
        throw std::domain_error("minimize_action: trait endpoint below floor");
    detail::ReducedProblem prob;
    prob.spec = &spec;
    prob.t = t;
    prob.dx = x - y;
    prob.floor = spec.theta_min;
    prob.segments = std::max(segments, 4);

    const int M = prob.segments;
    const double tol = 1e-8;
    std::vector<std::vector<double>> starts;

    // (i) constant path at the floor
    std::vector<double> z(M + 1, spec.theta_min);
    z[0] = eta_start;
    z[M] = theta;
    starts.push_back(z);
    // (ii) rectangular up/plateau/down profile at the scanned best height
    const double level = detail::best_plateau(prob, eta_start, theta);
    detail::make_rectangle(z, M, eta_start, theta, level);
    starts.push_back(z);
    // (iii) parabolic arc peaking at the same height
    for (int j = 0; j <= M; ++j) {
        const double s = static_cast<double>(j) / M;
        const double base = eta_start + (theta - eta_start) * s;
        z[j] = base + 4.0 * (level - 0.5 * (eta_start + theta)) * s * (1.0 - s);
    }
    z[0] = eta_start;
    z[M] = theta;
    starts.push_back(z);
    // extra restarts: deterministic perturbations of the rectangle
    unsigned lcg = 0x2545F491u;
    for (int r = 3; r < restarts; ++r) {
        detail::make_rectangle(z, M, eta_start, theta, level);
        for (int j = 1; j < M; ++j) {
            lcg = lcg * 1664525u + 1013904223u;
            const double u = (lcg >> 8) * (1.0 / 16777216.0) - 0.5;
            z[j] = std::max(spec.theta_min, z[j] * (1.0 + 0.4 * u));
        }
        starts.push_back(z);
    }

    MinimizeReport report;
    double best_f = std::numeric_limits<double>::infinity();
    std::vector<double> best_z;
    bool any_converged = false;
    for (auto& start : starts) {
        std::vector<double> zz = start;
        const bool ok = detail::spg_minimize(prob, zz, tol);
        const double f = detail::reduced_objective(prob, zz, nullptr);
        report.start_values.push_back(f);
        any_converged = any_converged || ok;
        if (f < best_f && (ok || best_z.empty())) {
            best_f = f;
            best_z = zz;
        }
    }
    if (!any_converged)
        throw numeric_error("minimize_action: no start converged (best objective " +
                            std::to_string(best_f) + ")");
    report.converged = any_converged;

    // Reconstruct Z1 from the conserved quantity Z1' = 2 alpha Z2.
    Trajectory traj;
    traj.times.resize(M + 1);
    traj.z1.resize(M + 1);
    traj.z2 = best_z;
    const double ds = prob.ds();
    double integral_z = 0.0;
    for (int k = 0; k < M; ++k) integral_z += 0.5 * (best_z[k] + best_z[k + 1]) * ds;
    const double alpha = (x - y) / (2.0 * integral_z);
    traj.times[0] = 0.0;
    traj.z1[0] = y;
    for (int k = 0; k < M; ++k) {
        traj.times[k + 1] = (k + 1) * ds;
        traj.z1[k + 1] = traj.z1[k] + 2.0 * alpha * 0.5 * (best_z[k] + best_z[k + 1]) * ds;
    }
    traj.times[M] = t;
    traj.action = action_of_trajectory(traj, spec);
    report.best = traj;
    return report;
}

inline MinimizeReport minimize_action_report(const TradeoffSpec& spec, double t, double x,
                                             double theta, int segments = 200,
                                             int restarts = 3) {
    return minimize_action_path(spec, t, 0.0, spec.theta_min, x, theta, segments, restarts);
}

inline Trajectory minimize_action(const TradeoffSpec& spec, double t, double x, double theta,
                                  int segments = 200, int restarts = 3) {
    return minimize_action_report(spec, t, x, theta, segments, restarts).best;
}

// Analytic lower bound on zeta for x past the front scale: the minimum of the
// trait-confined branch a_bar * t * sqrt(x / eta^{3/2}) and the straight-run
// branch x^2 / (8 theta_d t).
inline double zeta_lower_bound(const TradeoffSpec& spec, const PhiProfile& profile, double t,
                               double x, double theta, double a_bar) {
    (void)theta;
    if (!(a_bar > 0.0) || !(t > 0.0))
        throw std::domain_error("zeta_lower_bound: a_bar, t must be > 0");
    const double eta_t = profile.eta(a_bar, t);
    const double front = std::pow(eta_t, 1.5);
    if (x < front)
        throw std::domain_error("zeta_lower_bound: requires x >= eta_a(t)^{3/2}");
    const double branch1 = a_bar * t * std::sqrt(x / front);
    const double branch2 = x * x / (8.0 * theta_d(spec) * t);
    return std::min(branch1, branch2);
}

// Exponential budget of the three-leg rectangular sub-solution trajectory
// (up to the eta scale, across at high speed, back down) plus the growth
// credit accumulated near the trait floor afterwards.
struct PathBudget {
    // inputs
    double T = 100.0;
    double a_under = 0.01; // trait scale parameter (small)
    double A = 10.0;       // time-allocation parameter (large)
    double H = 2.0;        // starting trait offset
    double Lambda1 = 2.0;  // ellipse radius of the first leg
    double rho_bar = 1.0;  // uniform bound used for the crowding rate

    // derived
    double eta_T = 0.0;
    double c1 = 0.0, T1 = 0.0, c2 = 0.0;

    // outputs
    double up_cost = 0.0, right_cost = 0.0, down_cost = 0.0;
    double growth_credit = 0.0;
    double net_exponent = 0.0;
    double gamma_inf = 0.0, gamma_box = 0.0;
    bool admissible = false; // every leg under gamma_inf T / 10 and net > 0
};

inline PathBudget rectangular_path_cost(const TradeoffSpec& spec, PathBudget budget,
                                        double gamma_inf = std::numeric_limits<double>::quiet_NaN(),
                                        double gamma_box = std::numeric_limits<double>::quiet_NaN()) {
    PhiProfile prof(spec);
    if (std::isnan(gamma_inf)) gamma_inf = gamma_infinity(spec, 1e-7);
    if (!(gamma_inf > 0.0))
        throw std::domain_error("rectangular_path_cost: needs gamma_infinity > 0");
    if (std::isnan(gamma_box)) {
        const double r0 = find_growth_box(spec, gamma_inf, 0.8);
        gamma_box = box_eigen(spec, r0, r0, std::max(1024, static_cast<int>(r0 * 32))).first;
    }
    budget.gamma_inf = gamma_inf;
    budget.gamma_box = gamma_box;

    const double T = budget.T;
    const double eta_T = prof.eta(budget.a_under, T);
    budget.eta_T = eta_T;
    budget.c1 = T / (budget.A * std::pow(eta_T, 1.5));
    budget.T1 = budget.A * eta_T * eta_T / T;
    budget.c2 = T / (budget.A * std::sqrt(eta_T));

    const double r = budget.rho_bar + eval_m(spec, eta_T + budget.H + budget.Lambda1);
    const double c1 = budget.c1, T1 = budget.T1;
    budget.up_cost = 2.0 * budget.Lambda1 * c1 * c1 * T1 + r * T1 + std::pow(c1, 4) * T1 * T1 * T1 / 3.0;
    const double lambda2 = budget.Lambda1 / 2.0;
    budget.right_cost = 0.75 * lambda2 * T / (budget.A * eta_T) +
                        budget.A * r * eta_T * eta_T / T + T / (4.0 * budget.A);
    budget.down_cost = budget.up_cost;
    budget.growth_credit = gamma_box * (T - 3.0 * T1 - 1.0);
    budget.net_exponent =
        budget.growth_credit - (budget.up_cost + budget.right_cost + budget.down_cost);

    const double leg_cap = gamma_inf * T / 10.0;
    budget.admissible = budget.up_cost <= leg_cap && budget.right_cost <= leg_cap &&
                        budget.down_cost <= leg_cap && budget.net_exponent > 0.0 &&
                        T - 3.0 * T1 - 1.0 > 0.0;
    return budget;
}

// Predicted log-scale of the linearized solution: zeta/2 - C_fit * t. The
// level-set crossing of zero tracks the front of the linearized run.
inline double li_yau_exponent(const TradeoffSpec& spec, const PhiProfile& profile, double t,
                              double x, double theta, double c_fit, double gamma_inf,
                              int segments = 200) {
    const double eta_cap = profile.eta(gamma_inf + 1.0, t);
    if (theta > eta_cap)
        throw std::domain_error("li_yau_exponent: requires theta <= eta_{gamma+1}(t)");
    const Trajectory traj = minimize_action(spec, t, x, theta, segments);
    return 0.5 * traj.action - c_fit * t;
}

} // namespace toadlab
