#pragma once

// Independent reference computations used by the test suites. These
// deliberately avoid the library's solver paths: quadrature is a separate
// Simpson recursion, eigenvalues come from the implicit QL algorithm instead
// of Sturm bisection + inverse iteration, and the action oracle is an
// exhaustive lattice search.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------- quadrature

inline double simpson_rec(const std::function<double(double)>& f, double a, double fa,
                          double b, double fb, double m, double fm, double whole,
                          double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-12) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double scale = std::max(std::abs(whole), 1e-30);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, rel_tol * scale, 56);
}

// ---------------------------------------------------------- tql eigenvalues

// All eigenvalues of a symmetric tridiagonal matrix (diag d, off-diagonal e)
// via the implicit QL method with Wilkinson shifts (EISPACK tql1 lineage).
inline std::vector<double> tql_eigenvalues(std::vector<double> d, const std::vector<double>& off) {
    const int n = static_cast<int>(d.size());
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = off[i];
    auto sign_like = [](double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); };
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 50) throw std::runtime_error("tql: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + sign_like(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

inline double largest_eigenvalue(const std::vector<double>& d, const std::vector<double>& off) {
    return tql_eigenvalues(d, off).back();
}

// Symmetrized Neumann/Dirichlet discretization of d^2/dtheta^2 + V, matching
// the library's grid convention (n_nodes nodes, last one the Dirichlet zero).
inline void build_sym_operator(const std::function<double(double)>& potential, double theta_min,
                               double b, int n_nodes, std::vector<double>& diag,
                               std::vector<double>& off) {
    const int n = n_nodes - 1;
    const double h = b / (n_nodes - 1);
    const double ih2 = 1.0 / (h * h);
    diag.assign(n, 0.0);
    off.assign(n - 1, ih2);
    off[0] = std::sqrt(2.0) * ih2;
    for (int i = 0; i < n; ++i) diag[i] = -2.0 * ih2 + potential(theta_min + i * h);
}

// Principal eigenvalue at resolution N and 2N with h^2 Richardson
// extrapolation.
inline double principal_eigenvalue_richardson(const std::function<double(double)>& potential,
                                              double theta_min, double b, int n_nodes) {
    std::vector<double> d, e;
    build_sym_operator(potential, theta_min, b, n_nodes, d, e);
    const double g1 = largest_eigenvalue(d, e);
    build_sym_operator(potential, theta_min, b, 2 * n_nodes - 1, d, e);
    const double g2 = largest_eigenvalue(d, e);
    return (4.0 * g2 - g1) / 3.0;
}

// ---------------------------------------------------- 1D Crank-Nicolson heat

// Reference integrator for u_t = u_thetatheta + (1 - m(theta)) u with Neumann
// at theta_min and Dirichlet zero at theta_min + L, used to check the 2D
// scheme on x-independent data.
inline std::vector<double> heat_growth_1d(std::vector<double> u,
                                          const std::function<double(double)>& m_of_theta,
                                          double theta_min, double L, double t_final,
                                          int steps) {
    const int n = static_cast<int>(u.size()); // nodes incl. Dirichlet end
    const double h = L / (n - 1);
    const double dt = t_final / steps;
    const int nu = n - 1; // unknowns
    std::vector<double> react(nu);
    for (int i = 0; i < nu; ++i) react[i] = 1.0 - m_of_theta(theta_min + i * h);
    const double k = dt / (2.0 * h * h);
    std::vector<double> sub(nu), diag(nu), sup(nu), rhs(nu), x(nu), work;
    for (int i = 0; i < nu; ++i) {
        sub[i] = -k;
        sup[i] = -k;
        diag[i] = 1.0 + 2.0 * k - 0.5 * dt * react[i];
    }
    sup[0] = -2.0 * k; // Neumann fold
    for (int s = 0; s < steps; ++s) {
        for (int i = 0; i < nu; ++i) {
            const double um = (i == 0) ? u[1] : u[i - 1];
            const double up = (i + 1 < n) ? u[i + 1] : 0.0;
            rhs[i] = u[i] + k * (um - 2.0 * u[i] + up) + 0.5 * dt * react[i] * u[i];
        }
        // Thomas solve
        work.assign(nu, 0.0);
        double bet = diag[0];
        x[0] = rhs[0] / bet;
        for (int j = 1; j < nu; ++j) {
            work[j] = sup[j - 1] / bet;
            bet = diag[j] - sub[j] * work[j];
            x[j] = (rhs[j] - sub[j] * x[j - 1]) / bet;
        }
        for (int j = nu - 2; j >= 0; --j) x[j] -= work[j + 1] * x[j + 1];
        for (int j = 0; j < nu; ++j) u[j] = x[j];
        u[n - 1] = 0.0;
    }
    return u;
}

// ------------------------------------------------------ lattice action search

// Exhaustive minimum of the reduced path functional over all lattice paths:
// M segments, every interior node drawn from `levels` (endpoints fixed).
// Per-pair segment costs are tabulated up front and branches whose separable
// partial cost already exceeds the incumbent are pruned; the enumeration is
// still exhaustive over the surviving lattice.
class LatticeActionSearch {
public:
    LatticeActionSearch(std::function<double(double)> m_of_theta, double t,
                        double x_displacement, double z_start, double z_end, int segments,
                        std::vector<double> levels)
        : m_(std::move(m_of_theta)), t_(t), dx_(x_displacement), segments_(segments),
          levels_(std::move(levels)) {
        // node value set: levels plus the two endpoints at dedicated indices
        values_ = levels_;
        start_index_ = static_cast<int>(values_.size());
        values_.push_back(z_start);
        end_index_ = static_cast<int>(values_.size());
        values_.push_back(z_end);
        const int nv = static_cast<int>(values_.size());
        const double ds = t_ / segments_;
        seg_cost_.assign(nv * nv, 0.0);
        seg_intz_.assign(nv * nv, 0.0);
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b < nv; ++b) {
                const double mid = 0.5 * (values_[a] + values_[b]);
                const double dz = values_[b] - values_[a];
                seg_cost_[a * nv + b] = dz * dz / (4.0 * ds) + m_(mid) * ds;
                seg_intz_[a * nv + b] = mid * ds;
            }
    }

    double minimize(std::vector<double>* best_path = nullptr) {
        best_ = std::numeric_limits<double>::infinity();
        path_.assign(segments_ + 1, start_index_);
        path_[segments_] = end_index_;
        best_path_.clear();
        recurse(1, 0.0, 0.0);
        if (best_path) {
            best_path->clear();
            for (int idx : best_path_) best_path->push_back(values_[idx]);
        }
        return best_;
    }

private:
    void recurse(int node, double part_cost, double part_intz) {
        if (part_cost >= best_) return;
        const int nv = static_cast<int>(values_.size());
        if (node == segments_) {
            const int prev = path_[node - 1];
            const double cost = part_cost + seg_cost_[prev * nv + end_index_];
            const double intz = part_intz + seg_intz_[prev * nv + end_index_];
            const double total = cost + dx_ * dx_ / (4.0 * intz);
            if (total < best_) {
                best_ = total;
                best_path_ = path_;
            }
            return;
        }
        const int prev = path_[node - 1];
        for (int a = 0; a < static_cast<int>(levels_.size()); ++a) {
            path_[node] = a;
            recurse(node + 1, part_cost + seg_cost_[prev * nv + a],
                    part_intz + seg_intz_[prev * nv + a]);
        }
    }

    std::function<double(double)> m_;
    double t_, dx_;
    int segments_;
    std::vector<double> levels_, values_;
    int start_index_ = 0, end_index_ = 0;
    std::vector<double> seg_cost_, seg_intz_;
    double best_ = 0.0;
    std::vector<int> path_, best_path_;
};

// Two-pass lattice search: a coarse sweep over [floor, hi], then a zoom onto
// the band visited by the coarse optimum.
inline double lattice_action_min(const std::function<double(double)>& m_of_theta, double t,
                                 double x_displacement, double z_start, double z_end,
                                 int segments, double floor, double hi, int n_levels = 12) {
    auto make_levels = [&](double lo, double up) {
        std::vector<double> v(n_levels);
        for (int i = 0; i < n_levels; ++i)
            v[i] = lo + (up - lo) * i / (n_levels - 1);
        return v;
    };
    LatticeActionSearch coarse(m_of_theta, t, x_displacement, z_start, z_end, segments,
                               make_levels(floor, hi));
    std::vector<double> path;
    coarse.minimize(&path);
    double lo = *std::min_element(path.begin(), path.end());
    double up = *std::max_element(path.begin(), path.end());
    const double pad = std::max(0.5 * (up - lo) / (n_levels - 1) * 4.0, 1e-3);
    lo = std::max(floor, lo - pad);
    up = std::min(hi, up + pad) + pad;
    LatticeActionSearch fine(m_of_theta, t, x_displacement, z_start, z_end, segments,
                             make_levels(lo, up));
    return fine.minimize();
}

// ------------------------------------------------------ Christoffel symbols

// Finite-difference Christoffel symbols of g = diag(1/theta, 1) from the
// defining formula, central differences with step h.
inline std::array<std::array<std::array<double, 2>, 2>, 2> christoffel_fd(double theta,
                                                                          double h = 1e-5) {
    auto metric = [](double th, int i, int j) -> double {
        if (i == 0 && j == 0) return 1.0 / th;
        if (i == 1 && j == 1) return 1.0;
        return 0.0;
    };
    auto metric_inv = [](double th, int i, int j) -> double {
        if (i == 0 && j == 0) return th;
        if (i == 1 && j == 1) return 1.0;
        return 0.0;
    };
    // Coordinates: index 0 is x (metric independent), index 1 is theta.
    auto dmetric = [&](int coord, double th, int i, int j) -> double {
        if (coord == 0) return 0.0;
        return (metric(th + h, i, j) - metric(th - h, i, j)) / (2.0 * h);
    };
    std::array<std::array<std::array<double, 2>, 2>, 2> gamma{};
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                double s = 0.0;
                for (int k = 0; k < 2; ++k)
                    s += metric_inv(theta, c, k) *
                         (dmetric(b, theta, k, a) + dmetric(a, theta, k, b) -
                          dmetric(k, theta, a, b));
                gamma[c][a][b] = 0.5 * s;
            }
    return gamma;
}

} // namespace oracle
