#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "toadlab/errors.hpp"
#include "toadlab/phi.hpp"
#include "toadlab/tradeoff.hpp"
#include "toadlab/tridiag.hpp"

namespace toadlab {

// Principal eigenelements of d^2/dtheta^2 + V(theta) on [theta_min,
// theta_min + b], Neumann at the trait floor and homogeneous Dirichlet at the
// truncation. Discretized with second-order central differences; the Neumann
// ghost node is eliminated so that a diagonal similarity renders the matrix
// symmetric, which keeps the discrete problem self-adjoint and the principal
// eigenfunction positive.
//
// The trichotomy of the model hangs on these solves: the sign of
// gamma_infinity (potential 1 - m) decides extinction, the dispersion curve
// lambda -> c_lambda (potential lambda^2*theta + 1 - m) decides the linear
// spreading speed, and the box eigenvalue gamma_{r,s} powers the growth
// accounting of the rectangular sub-solution path.

enum class Normalization { SupOne, IntegralEqualsEigenvalue };

struct EigenPair {
    double eigenvalue = 0.0;
    double theta_min = 0.0;
    double truncation_b = 0.0;
    // Uniform grid over [theta_min, theta_min + b]; the last node carries the
    // Dirichlet zero.
    std::vector<double> grid;
    std::vector<double> eigenfunction;
    Normalization normalization = Normalization::SupOne;

    double h() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }

    // psi = -log Q, defined where Q > 0.
    std::vector<double> psi() const {
        std::vector<double> out(eigenfunction.size(),
                                std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < eigenfunction.size(); ++i)
            if (eigenfunction[i] > 0.0) out[i] = -std::log(eigenfunction[i]);
        return out;
    }

    double trapezoid_integral() const {
        const double step = h();
        double s = 0.0;
        for (std::size_t i = 0; i < eigenfunction.size(); ++i) {
            const bool edge = (i == 0 || i + 1 == eigenfunction.size());
            s += (edge ? 0.5 : 1.0) * eigenfunction[i];
        }
        return s * step;
    }
};

namespace detail {

struct SymTridiag {
    std::vector<double> diag; // size n (unknowns; Dirichlet node excluded)
    std::vector<double> off;  // size n-1, off[0] = sqrt(2)/h^2 from the Neumann fold
    double h = 0.0;
};

inline SymTridiag build_operator(const std::function<double(double)>& potential,
                                 double theta_min, double b, int n_nodes) {
    if (n_nodes < 64) throw std::domain_error("principal_eigenpair: need N >= 64");
    SymTridiag m;
    const int n = n_nodes - 1; // unknowns; node n_nodes-1 is the Dirichlet zero
    m.h = b / (n_nodes - 1);
    const double ih2 = 1.0 / (m.h * m.h);
    m.diag.resize(n);
    m.off.assign(n - 1, ih2);
    m.off[0] = std::sqrt(2.0) * ih2;
    for (int i = 0; i < n; ++i)
        m.diag[i] = -2.0 * ih2 + potential(theta_min + i * m.h);
    return m;
}

// Largest eigenvalue by Sturm bisection, then inverse iteration for the
// eigenvector. Returns the pair in the symmetrized basis.
inline std::pair<double, std::vector<double>> principal_symmetric(const SymTridiag& m,
                                                                  double residual_tol,
                                                                  int max_iter) {
    const int n = static_cast<int>(m.diag.size());
    double lo = m.diag[0], hi = m.diag[0];
    for (int i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(m.off[i - 1]) : 0.0) +
                         (i + 1 < n ? std::abs(m.off[i]) : 0.0);
        lo = std::min(lo, m.diag[i] - r);
        hi = std::max(hi, m.diag[i] + r);
    }
    hi += 1.0;
    // Bisect for the boundary between "n-1 below" and "n below".
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count_below(m.diag, m.off, mid) >= n) hi = mid; else lo = mid;
        if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(lo), std::abs(hi)))
            break;
    }
    double gamma = 0.5 * (lo + hi);

    // Inverse iteration with the shift just above the spectrum edge.
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * std::sin(0.7 * i);
    const double shift = hi;
    double norm_a = 0.0;
    for (int i = 0; i < n; ++i)
        norm_a = std::max(norm_a, std::abs(m.diag[i]) +
                                      (i > 0 ? std::abs(m.off[i - 1]) : 0.0) +
                                      (i + 1 < n ? std::abs(m.off[i]) : 0.0));
    // Floating floor: the solve's backward error accumulates like
    // sqrt(n) * eps * ||A||, which bounds the attainable residual.
    const double floor_resid = std::sqrt(static_cast<double>(n)) *
                               std::numeric_limits<double>::epsilon() * norm_a;
    const double tol = std::max(residual_tol, 12.0 * floor_resid);
    std::vector<double> shifted_diag(n);

    double rayleigh = gamma;
    double used_shift = shift;
    double best_resid = std::numeric_limits<double>::infinity();
    int stagnant = 0;
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i < n; ++i) shifted_diag[i] = m.diag[i] - used_shift;
        tridiag_solve_pivoted(shifted_diag, m.off, v);
        double vmax = 0.0;
        bool ok = true;
        for (double x : v) {
            if (!std::isfinite(x)) { ok = false; break; }
            vmax = std::max(vmax, std::abs(x));
        }
        if (!ok || vmax == 0.0) {
            // Singular-to-working-precision shift: nudge it and restart.
            used_shift = shift + (it + 1) * 64.0 * std::numeric_limits<double>::epsilon() * norm_a;
            for (int i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * std::sin(0.7 * i + it);
            continue;
        }
        for (double& x : v) x /= vmax;

        // Rayleigh quotient and residual in the symmetric basis.
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            double av = m.diag[i] * v[i];
            if (i > 0) av += m.off[i - 1] * v[i - 1];
            if (i + 1 < n) av += m.off[i] * v[i + 1];
            num += v[i] * av;
            den += v[i] * v[i];
        }
        rayleigh = num / den;
        double resid = 0.0, vinf = 0.0;
        for (int i = 0; i < n; ++i) {
            double av = m.diag[i] * v[i];
            if (i > 0) av += m.off[i - 1] * v[i - 1];
            if (i + 1 < n) av += m.off[i] * v[i + 1];
            resid = std::max(resid, std::abs(av - rayleigh * v[i]));
            vinf = std::max(vinf, std::abs(v[i]));
        }
        // Rayleigh-shift refinement tightens the vector once the bisection
        // shift has isolated the principal direction.
        used_shift = rayleigh;
        if (resid < 0.9 * best_resid) {
            best_resid = resid;
            stagnant = 0;
        } else {
            ++stagnant;
        }
        // Some potentials stall a small factor above the sqrt(n) floor; a
        // stagnated residual within a wider multiple of it is converged.
        const bool stalled_at_floor = stagnant >= 5 && resid <= 128.0 * floor_resid * vinf;
        if (resid <= tol * vinf || stalled_at_floor) {
            // The refined value must agree with the bisection bracket; a
            // mismatch means the iteration locked onto a lower eigenpair.
            if (std::abs(rayleigh - gamma) >
                256.0 * std::numeric_limits<double>::epsilon() * norm_a + 1e-12)
                throw numeric_error("principal_eigenpair: refinement left the principal bracket");
            // Orient positive.
            double vmx = 0.0;
            int imx = 0;
            for (int i = 0; i < n; ++i)
                if (std::abs(v[i]) > vmx) { vmx = std::abs(v[i]); imx = i; }
            if (v[imx] < 0.0)
                for (double& x : v) x = -x;
            return {rayleigh, v};
        }
    }
    throw numeric_error("principal_eigenpair: no convergence after " +
                        std::to_string(max_iter) + " iterations (residual report: tol=" +
                        std::to_string(tol) + ")");
}

} // namespace detail

// Principal eigenpair of d^2/dtheta^2 + potential with Neumann(left) /
// Dirichlet(right) boundary conditions on [theta_min, theta_min+b], N nodes.
inline EigenPair principal_eigenpair(const std::function<double(double)>& potential,
                                     double theta_min, double b, int n_nodes,
                                     double residual_tol = 1e-10, int max_iter = 500) {
    const detail::SymTridiag m = detail::build_operator(potential, theta_min, b, n_nodes);
    auto [gamma, v] = detail::principal_symmetric(m, residual_tol, max_iter);

    EigenPair out;
    out.eigenvalue = gamma;
    out.theta_min = theta_min;
    out.truncation_b = b;
    out.grid.resize(n_nodes);
    out.eigenfunction.assign(n_nodes, 0.0);
    for (int i = 0; i < n_nodes; ++i) out.grid[i] = theta_min + i * m.h;
    // Undo the Neumann symmetrization (first component scaled by sqrt(2)).
    out.eigenfunction[0] = v[0] * std::sqrt(2.0);
    for (std::size_t i = 1; i < v.size(); ++i) out.eigenfunction[i] = v[i];
    // SupOne by default.
    double mx = 0.0;
    for (double x : out.eigenfunction) mx = std::max(mx, x);
    for (double& x : out.eigenfunction) x /= mx;
    out.normalization = Normalization::SupOne;
    return out;
}

// gamma_infinity: principal eigenvalue of Q'' + (1 - m) Q on the half line,
// approached by doubling Dirichlet truncations at fixed grid spacing (so the
// discrete eigenvalues are exactly nondecreasing in b) until the increments
// fall below tol.
inline double gamma_infinity(const TradeoffSpec& spec, double tol = 1e-8,
                             double b0 = 0.0, int n0 = 2048, int max_doublings = 8) {
    if (spec.kind == TradeoffKind::Zero)
        throw std::domain_error("gamma_infinity: trade-off must be nontrivial");
    if (b0 <= 0.0) {
        // Default truncation from the trait-spreading scale: tails beyond the
        // eta scale decay super-exponentially.
        PhiProfile prof(spec);
        b0 = std::max(10.0, 2.0 * prof.eta1(10.0));
    }
    auto potential = [&spec](double th) { return 1.0 - eval_m(spec, th); };
    double b = b0;
    int n = n0;
    double prev = -std::numeric_limits<double>::infinity();
    std::vector<double> seq;
    for (int k = 0; k <= max_doublings; ++k) {
        const EigenPair ep = principal_eigenpair(potential, spec.theta_min, b, n);
        const double g = ep.eigenvalue;
        if (g < prev - 1e-9 * std::max(1.0, std::abs(prev)))
            throw numeric_error("gamma_infinity: eigenvalue decreased under domain growth "
                                "(discretization too coarse)");
        seq.push_back(g);
        if (k > 0 && std::abs(g - prev) < tol) {
            // Aitken extrapolation when the last three values allow it.
            if (seq.size() >= 3) {
                const double d1 = seq[seq.size() - 2] - seq[seq.size() - 3];
                const double d2 = seq[seq.size() - 1] - seq[seq.size() - 2];
                const double den = d2 - d1;
                if (std::abs(den) > 1e-14 * std::max(1.0, std::abs(g))) {
                    const double extrap = g - d2 * d2 / den;
                    if (std::abs(extrap - g) < 10.0 * tol) return extrap;
                }
            }
            return g;
        }
        prev = g;
        b *= 2.0;
        n = 2 * n - 1; // keeps h fixed
    }
    throw numeric_error("gamma_infinity: truncation doubling did not converge");
}

// Ground state Q of the linearized trait operator on a truncation, with the
// requested normalization.
inline EigenPair ground_state_Q(const TradeoffSpec& spec, double b, int n_nodes,
                                Normalization norm = Normalization::SupOne) {
    EigenPair ep = principal_eigenpair(
        [&spec](double th) { return 1.0 - eval_m(spec, th); }, spec.theta_min, b, n_nodes);
    if (norm == Normalization::IntegralEqualsEigenvalue) {
        if (ep.eigenvalue <= 0.0)
            throw std::invalid_argument(
                "ground_state_Q: IntegralEqualsEigenvalue requires a positive eigenvalue");
        const double I = ep.trapezoid_integral();
        const double scale = ep.eigenvalue / I;
        for (double& x : ep.eigenfunction) x *= scale;
        ep.normalization = Normalization::IntegralEqualsEigenvalue;
    }
    return ep;
}

// Dispersion relation: c_lambda from the exponential-ansatz eigenproblem
// Q'' + [lambda^2 theta - lambda c + 1 - m] Q = 0 on the truncation.
// `potential_shift` perturbs the zeroth-order term (used by the
// c_{lambda,eps} = c_lambda - 2 eps / lambda identity checks).
inline double dispersion_c_lambda(const TradeoffSpec& spec, double lambda, double b,
                                  int n_nodes, double potential_shift = 0.0) {
    if (!(lambda > 0.0)) throw std::domain_error("dispersion_c_lambda: lambda must be > 0");
    const EigenPair ep = principal_eigenpair(
        [&](double th) {
            return lambda * lambda * th + 1.0 - eval_m(spec, th) + potential_shift;
        },
        spec.theta_min, b, n_nodes);
    return ep.eigenvalue / lambda;
}

struct DispersionCurve {
    std::vector<double> lambdas;
    std::vector<double> speeds;
    double c_star = 0.0;
    double lambda_star = 0.0;
    std::optional<double> critical_mu; // set when lim m/theta is finite positive
    bool boundary_infimum = false;     // minimizer pushed against lambda = mu
};

// Minimal spreading speed c* = min_lambda c_lambda. In the critical case the
// admissible decay rates stop at mu = sqrt(lim m/theta); if the coarse scan
// minimizes at that edge the result is reported as a boundary infimum rather
// than a minimum.
inline DispersionCurve minimal_speed(const TradeoffSpec& spec, double b, int n_nodes,
                                     int scan_points = 48) {
    const double limit = regime_limit(spec);
    if (limit == 0.0) {
        // Sub-linear trade-off: the untruncated dispersion problem is not
        // solvable; any finite-b curve is truncation dependent. Callers that
        // want the accelerating diagnostics use the fronts module instead.
        throw std::domain_error(
            "minimal_speed: sub-linear trade-off has no untruncated dispersion relation");
    }
    const double gamma_b =
        principal_eigenpair([&spec](double th) { return 1.0 - eval_m(spec, th); },
                            spec.theta_min, b, n_nodes)
            .eigenvalue;
    if (gamma_b <= 0.0)
        throw std::domain_error("minimal_speed: gamma_infinity <= 0, no positive speed");

    DispersionCurve curve;
    double lambda_hi = 1e3;
    if (std::isfinite(limit) && limit > 0.0) {
        curve.critical_mu = std::sqrt(limit);
        lambda_hi = *curve.critical_mu * (1.0 - 1e-6);
    }
    const double lambda_lo = 1e-3;
    curve.lambdas.resize(scan_points);
    curve.speeds.resize(scan_points);
    const double lr = std::log(lambda_hi / lambda_lo);
    int imin = 0;
    for (int i = 0; i < scan_points; ++i) {
        const double lam = lambda_lo * std::exp(lr * i / (scan_points - 1));
        curve.lambdas[i] = lam;
        curve.speeds[i] = dispersion_c_lambda(spec, lam, b, n_nodes);
        if (curve.speeds[i] < curve.speeds[imin]) imin = i;
    }
    if (imin == scan_points - 1 && curve.critical_mu) {
        curve.boundary_infimum = true;
        curve.c_star = curve.speeds[imin];
        curve.lambda_star = curve.lambdas[imin];
        return curve;
    }
    if (imin == 0 || imin == scan_points - 1)
        throw numeric_error("minimal_speed: coarse scan found no interior bracket");

    // Golden-section on log-lambda.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(curve.lambdas[imin - 1]);
    double c = std::log(curve.lambdas[imin + 1]);
    double x1 = c - gr * (c - a);
    double x2 = a + gr * (c - a);
    auto eval = [&](double loglam) {
        return dispersion_c_lambda(spec, std::exp(loglam), b, n_nodes);
    };
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 60 && (c - a) > 1e-10; ++it) {
        if (f1 <= f2) { // ties move left: lambda* is the smallest minimizer
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - gr * (c - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (c - a);
            f2 = eval(x2);
        }
    }
    curve.lambda_star = std::exp(0.5 * (a + c));
    curve.c_star = eval(0.5 * (a + c));
    return curve;
}

// Dirichlet box eigenelements (gamma_{r,s}, V_{r,s}) of the separable
// cosine-mode reduction: V'' + (1 - m - pi^2 d / (4 r^2)) V = gamma V on
// (theta_min, theta_min + s). The diffusivity d is theta itself unless a
// frozen constant is supplied.
inline std::pair<double, EigenPair> box_eigen(const TradeoffSpec& spec, double r, double s,
                                              int n_nodes,
                                              std::optional<double> frozen_d = std::nullopt) {
    if (!(r > 0.0) || !(s > 0.0)) throw std::domain_error("box_eigen: r, s must be > 0");
    const double coef = M_PI * M_PI / (4.0 * r * r);
    EigenPair ep = principal_eigenpair(
        [&](double th) {
            const double d = frozen_d ? *frozen_d : th;
            return 1.0 - eval_m(spec, th) - coef * d;
        },
        spec.theta_min, s, n_nodes);
    return {ep.eigenvalue, ep};
}

// Smallest b-doubling box r = s with gamma_{r,s} above the requested fraction
// of gamma_infinity (exists whenever gamma_infinity > 0).
inline double find_growth_box(const TradeoffSpec& spec, double gamma_inf, double fraction,
                              int n_nodes = 1024, double r_start = 8.0) {
    if (!(gamma_inf > 0.0))
        throw std::domain_error("find_growth_box: gamma_infinity must be positive");
    for (double r = r_start; r <= 4096.0; r *= 2.0) {
        const int n = std::max(n_nodes, static_cast<int>(r * 32));
        const auto [g, ep] = box_eigen(spec, r, r, n);
        (void)ep;
        if (g > fraction * gamma_inf) return r;
    }
    throw numeric_error("find_growth_box: no admissible box up to r = 4096");
}

} // namespace toadlab
