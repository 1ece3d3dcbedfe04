#pragma once

#include <array>
#include <cmath>

#include "toadlab/action.hpp"
#include "toadlab/errors.hpp"
#include "toadlab/tradeoff.hpp"

namespace toadlab {

// Riemannian view of the space-trait half plane: with the metric
// g = diag(1/theta, 1) the second-order part theta d_xx + d_thetatheta of the
// model is the Laplace-Beltrami operator (up to an integrating factor), and
// the trade-off-free action is d_g^2 / (4t). Used to cross-validate the
// action optimizer.

struct Metric {
    double theta_min = 1.0;

    std::array<double, 2> g(double theta) const {
        check(theta);
        return {1.0 / theta, 1.0}; // diagonal entries
    }
    std::array<double, 2> g_inv(double theta) const {
        check(theta);
        return {theta, 1.0};
    }

    void check(double theta) const {
        if (theta < theta_min) throw std::domain_error("metric: theta below trait floor");
    }
};

struct ChristoffelSymbols {
    // gamma[c][a][b] = Gamma^c_{ab}; coordinate 0 is x, coordinate 1 is theta
    std::array<std::array<std::array<double, 2>, 2>, 2> gamma{};
};

inline ChristoffelSymbols christoffel(double theta, double theta_min = 0.0) {
    if (theta < theta_min || !(theta > 0.0))
        throw std::domain_error("christoffel: theta below trait floor");
    ChristoffelSymbols c;
    c.gamma[0][0][1] = c.gamma[0][1][0] = -1.0 / (2.0 * theta);
    c.gamma[1][0][0] = 1.0 / (2.0 * theta * theta);
    return c;
}

inline double scalar_curvature(double theta, double theta_min = 0.0) {
    if (theta < theta_min || !(theta > 0.0))
        throw std::domain_error("scalar_curvature: theta below trait floor");
    return -2.0 / (theta * theta);
}

// Geodesic distance by energy minimization over discretized paths: the
// reduced action machinery with m == 0 gives E/4 on the unit interval, and
// d_g = sqrt(E) for the constant-speed geodesic.
inline double geodesic_distance(double x0, double theta0, double x1, double theta1,
                                double theta_min, int segments = 200, int restarts = 3) {
    const TradeoffSpec flat = TradeoffSpec::zero(theta_min);
    const MinimizeReport rep =
        minimize_action_path(flat, 1.0, x0, theta0, x1, theta1, segments, restarts);
    if (!rep.converged) throw numeric_error("geodesic_distance: optimizer failed");
    return 2.0 * std::sqrt(std::max(rep.best.action, 0.0));
}

} // namespace toadlab
