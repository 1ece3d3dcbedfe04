#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "toadlab/errors.hpp"
#include "toadlab/grid.hpp"

namespace toadlab {

// Level-set front positions and the power-law / speed fits applied to them.
// The space front is read off the spatial density rho, which the spreading
// laws control uniformly in theta; the trait front off the max-over-x
// marginal.

struct FrontTrace {
    std::vector<double> times;
    std::vector<std::optional<double>> x_front;
    std::vector<std::optional<double>> theta_front;
    double threshold = 1e-2;
};

struct FitResult {
    double value = 0.0;   // exponent or speed
    double stderr_ = 0.0; // standard error of the slope
    double t_lo = 0.0, t_hi = 0.0;
    double r_squared = 0.0;
    int n_points = 0;
};

// Largest x with rho(x) >= threshold, linearly interpolated between the
// bracketing nodes. Missing when the level is never attained.
inline std::optional<double> front_position(const Density1D& density, double threshold) {
    if (!(threshold > 0.0)) throw std::domain_error("front_position: threshold must be > 0");
    const auto& v = density.values;
    const int n = static_cast<int>(v.size());
    for (int i = n - 1; i >= 0; --i) {
        if (v[i] >= threshold) {
            if (i == n - 1) return density.grid.x(i);
            const double x0 = density.grid.x(i), x1 = density.grid.x(i + 1);
            const double f = (v[i] - threshold) / (v[i] - v[i + 1]);
            return x0 + f * (x1 - x0);
        }
    }
    return std::nullopt;
}

// Largest theta such that max over x of n(., theta) >= threshold.
inline std::optional<double> trait_front(const Field2D& field, double threshold) {
    if (!(threshold > 0.0)) throw std::domain_error("trait_front: threshold must be > 0");
    const auto& g = field.grid;
    std::vector<double> colmax(g.ntheta, 0.0);
    for (int j = 0; j < g.ntheta; ++j) {
        double mx = 0.0;
        for (int i = 0; i < g.nx; ++i) mx = std::max(mx, field.at(i, j));
        colmax[j] = mx;
    }
    for (int j = g.ntheta - 1; j >= 0; --j) {
        if (colmax[j] >= threshold) {
            if (j == g.ntheta - 1) return g.theta(j);
            const double f = (colmax[j] - threshold) / (colmax[j] - colmax[j + 1]);
            return g.theta(j) + f * (g.theta(j + 1) - g.theta(j));
        }
    }
    return std::nullopt;
}

namespace detail {

struct LsqFit {
    double slope = 0.0, intercept = 0.0, stderr_slope = 0.0, r2 = 0.0;
    int n = 0;
};

inline LsqFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    LsqFit f;
    f.n = static_cast<int>(xs.size());
    double sx = 0, sy = 0;
    for (int i = 0; i < f.n; ++i) { sx += xs[i]; sy += ys[i]; }
    const double mx = sx / f.n, my = sy / f.n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < f.n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (int i = 0; i < f.n; ++i) {
        const double r = ys[i] - (f.intercept + f.slope * xs[i]);
        sse += r * r;
    }
    f.stderr_slope = (f.n > 2) ? std::sqrt(sse / (f.n - 2) / sxx) : 0.0;
    f.r2 = (syy > 0.0) ? 1.0 - sse / syy : 1.0;
    return f;
}

inline void collect_window(const FrontTrace& trace, double t_lo, double t_hi, bool trait,
                           std::vector<double>& ts, std::vector<double>& xs) {
    const auto& pos = trait ? trace.theta_front : trace.x_front;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double t = trace.times[i];
        if (t < t_lo || t > t_hi) continue;
        if (!pos[i]) continue;
        ts.push_back(t);
        xs.push_back(*pos[i]);
    }
}

} // namespace detail

// Slope of log(position) against log(t) over the window.
inline FitResult fit_exponent(const FrontTrace& trace, double t_lo, double t_hi,
                              bool trait = false) {
    std::vector<double> ts, xs;
    detail::collect_window(trace, t_lo, t_hi, trait, ts, xs);
    if (ts.size() < 8) throw std::domain_error("fit_exponent: fewer than 8 points in window");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0.0) || !(xs[i] > 0.0))
            throw std::domain_error("fit_exponent: nonpositive time or position in window");
        lx.push_back(std::log(ts[i]));
        ly.push_back(std::log(xs[i]));
    }
    const auto f = detail::least_squares(lx, ly);
    return {f.slope, f.stderr_slope, t_lo, t_hi, f.r2, f.n};
}

// Slope of position against t over the window (the measured speed).
inline FitResult fit_speed(const FrontTrace& trace, double t_lo, double t_hi) {
    std::vector<double> ts, xs;
    detail::collect_window(trace, t_lo, t_hi, false, ts, xs);
    if (ts.size() < 8) throw std::domain_error("fit_speed: fewer than 8 points in window");
    const auto f = detail::least_squares(ts, xs);
    return {f.slope, f.stderr_slope, t_lo, t_hi, f.r2, f.n};
}

} // namespace toadlab
