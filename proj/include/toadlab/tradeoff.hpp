#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "toadlab/errors.hpp"

namespace toadlab {

// Mortality trade-off m(theta): zero at the trait floor theta_min,
// nondecreasing, and (except for the Zero control) growing without bound.
// The limit of m(theta)/theta selects the propagation regime.
enum class TradeoffKind { PowerLaw, LogPower, LinearPlus, Zero, Tabulated };

enum class Regime { Extinction, Linear, Accelerating };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Extinction: return "extinction";
        case Regime::Linear: return "linear";
        case Regime::Accelerating: return "accelerating";
    }
    return "?";
}

struct TradeoffSpec {
    TradeoffKind kind = TradeoffKind::Zero;
    double theta_min = 1.0;

    // PowerLaw: m = C * (theta^p - theta_min^p)
    // LogPower: m = C * log(theta/theta_min)^p
    double C = 1.0;
    double p = 1.0;

    // LinearPlus: m = mu^2 * (theta - theta_min) + sub(theta)
    double mu = 1.0;
    std::shared_ptr<TradeoffSpec> sub;

    // Tabulated: sorted (theta, m) knots, first knot (theta_min, 0).
    std::vector<std::pair<double, double>> knots;

    static TradeoffSpec power_law(double C, double p, double theta_min) {
        TradeoffSpec s;
        s.kind = TradeoffKind::PowerLaw;
        s.C = C;
        s.p = p;
        s.theta_min = theta_min;
        return s;
    }
    static TradeoffSpec log_power(double C, double p, double theta_min) {
        TradeoffSpec s;
        s.kind = TradeoffKind::LogPower;
        s.C = C;
        s.p = p;
        s.theta_min = theta_min;
        return s;
    }
    static TradeoffSpec linear_plus(double mu, double theta_min,
                                    std::shared_ptr<TradeoffSpec> sub = nullptr) {
        TradeoffSpec s;
        s.kind = TradeoffKind::LinearPlus;
        s.mu = mu;
        s.theta_min = theta_min;
        s.sub = std::move(sub);
        return s;
    }
    static TradeoffSpec zero(double theta_min) {
        TradeoffSpec s;
        s.kind = TradeoffKind::Zero;
        s.theta_min = theta_min;
        return s;
    }
    static TradeoffSpec tabulated(std::vector<std::pair<double, double>> knots) {
        TradeoffSpec s;
        s.kind = TradeoffKind::Tabulated;
        s.knots = std::move(knots);
        if (s.knots.empty()) throw config_error("tabulated trade-off needs at least one knot");
        s.theta_min = s.knots.front().first;
        return s;
    }
};

namespace detail {

// Fritsch-Carlson monotone cubic Hermite slopes for a nondecreasing table.
inline std::vector<double> monotone_hermite_slopes(const std::vector<std::pair<double, double>>& k) {
    const int n = static_cast<int>(k.size());
    std::vector<double> d(n, 0.0);
    if (n == 1) return d;
    std::vector<double> sec(n - 1);
    for (int i = 0; i + 1 < n; ++i)
        sec[i] = (k[i + 1].second - k[i].second) / (k[i + 1].first - k[i].first);
    d[0] = sec[0];
    d[n - 1] = sec[n - 2];
    for (int i = 1; i + 1 < n; ++i)
        d[i] = (sec[i - 1] * sec[i] <= 0.0) ? 0.0 : 0.5 * (sec[i - 1] + sec[i]);
    for (int i = 0; i + 1 < n; ++i) {
        if (sec[i] == 0.0) {
            d[i] = d[i + 1] = 0.0;
            continue;
        }
        const double a = d[i] / sec[i];
        const double b = d[i + 1] / sec[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            d[i] = tau * a * sec[i];
            d[i + 1] = tau * b * sec[i];
        }
    }
    return d;
}

inline double tabulated_eval(const TradeoffSpec& spec, double theta, bool derivative) {
    const auto& k = spec.knots;
    const int n = static_cast<int>(k.size());
    if (n == 1) return derivative ? 0.0 : k[0].second;
    if (theta >= k.back().first) {
        // Extrapolation linear in sqrt(m): sqrt(m) = sqrt(m_n) + slope*(theta - theta_n).
        const double m_n = k[n - 1].second;
        const double m_p = k[n - 2].second;
        const double dx = k[n - 1].first - k[n - 2].first;
        const double slope = (std::sqrt(m_n) - std::sqrt(m_p)) / dx;
        const double root = std::sqrt(m_n) + slope * (theta - k[n - 1].first);
        if (derivative) return 2.0 * root * slope;
        return root * root;
    }
    // Slopes are cheap relative to typical table sizes; recompute per call to
    // keep the spec immutable and sharable across threads.
    const std::vector<double> d = monotone_hermite_slopes(k);
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (k[mid].first <= theta) lo = mid; else hi = mid;
    }
    const double h = k[hi].first - k[lo].first;
    const double t = (theta - k[lo].first) / h;
    const double y0 = k[lo].second, y1 = k[hi].second;
    const double m0 = d[lo] * h, m1 = d[hi] * h;
    const double t2 = t * t, t3 = t2 * t;
    if (!derivative) {
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 +
               (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
    }
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 +
            (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h;
}

} // namespace detail

// m(theta); throws std::domain_error below the trait floor.
inline double eval_m(const TradeoffSpec& spec, double theta) {
    if (theta < spec.theta_min)
        throw std::domain_error("eval_m: theta below trait floor");
    switch (spec.kind) {
        case TradeoffKind::PowerLaw:
            return spec.C * (std::pow(theta, spec.p) - std::pow(spec.theta_min, spec.p));
        case TradeoffKind::LogPower:
            return spec.C * std::pow(std::log(theta / spec.theta_min), spec.p);
        case TradeoffKind::LinearPlus: {
            double v = spec.mu * spec.mu * (theta - spec.theta_min);
            if (spec.sub) v += eval_m(*spec.sub, theta);
            return v;
        }
        case TradeoffKind::Zero:
            return 0.0;
        case TradeoffKind::Tabulated:
            return detail::tabulated_eval(spec, theta, false);
    }
    return 0.0;
}

// dm/dtheta, used by the action optimizer's gradient.
inline double eval_m_prime(const TradeoffSpec& spec, double theta) {
    if (theta < spec.theta_min)
        throw std::domain_error("eval_m_prime: theta below trait floor");
    switch (spec.kind) {
        case TradeoffKind::PowerLaw:
            return spec.C * spec.p * std::pow(theta, spec.p - 1.0);
        case TradeoffKind::LogPower: {
            const double l = std::log(theta / spec.theta_min);
            if (l == 0.0) return (spec.p > 1.0) ? 0.0
                                 : (spec.p == 1.0 ? spec.C / theta
                                                  : std::numeric_limits<double>::infinity());
            return spec.C * spec.p * std::pow(l, spec.p - 1.0) / theta;
        }
        case TradeoffKind::LinearPlus: {
            double v = spec.mu * spec.mu;
            if (spec.sub) v += eval_m_prime(*spec.sub, theta);
            return v;
        }
        case TradeoffKind::Zero:
            return 0.0;
        case TradeoffKind::Tabulated:
            return detail::tabulated_eval(spec, theta, true);
    }
    return 0.0;
}

// lim m(theta)/theta: 0 (sub-linear), a positive constant (critical),
// or +infinity (super-linear).
inline double regime_limit(const TradeoffSpec& spec) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (spec.kind) {
        case TradeoffKind::PowerLaw:
            if (spec.p < 1.0) return 0.0;
            if (spec.p == 1.0) return spec.C;
            return inf;
        case TradeoffKind::LogPower:
            return 0.0;
        case TradeoffKind::LinearPlus:
            return spec.mu * spec.mu;
        case TradeoffKind::Zero:
            return 0.0;
        case TradeoffKind::Tabulated: {
            // sqrt(m) extrapolates linearly, so a positive terminal slope means
            // quadratic growth of m (super-linear ratio); zero slope means the
            // ratio decays.
            const auto& k = spec.knots;
            if (k.size() < 2) return 0.0;
            const double s = std::sqrt(k.back().second) - std::sqrt(k[k.size() - 2].second);
            return s > 0.0 ? inf : 0.0;
        }
    }
    return 0.0;
}

// Threshold past which m(theta)/theta is decreasing (sub-linear specs).
// Analytic for the parametric families, sampled otherwise.
inline double theta_d(const TradeoffSpec& spec) {
    switch (spec.kind) {
        case TradeoffKind::PowerLaw:
            if (spec.p < 1.0)
                return spec.theta_min * std::pow(1.0 / (1.0 - spec.p), 1.0 / spec.p);
            return spec.theta_min;
        case TradeoffKind::LogPower:
            return spec.theta_min * std::exp(spec.p);
        case TradeoffKind::Zero:
        case TradeoffKind::LinearPlus:
            return spec.theta_min;
        case TradeoffKind::Tabulated: {
            double best = spec.theta_min;
            double prev = 0.0;
            for (double th = spec.theta_min * 1.01; th < spec.theta_min * 1e6; th *= 1.05) {
                const double r = eval_m(spec, th) / th;
                if (r > prev) best = th;
                prev = r;
            }
            return best;
        }
    }
    return spec.theta_min;
}

// Regime trichotomy: a non-positive growth rate means extinction; otherwise a
// positive ratio limit gives linear spreading and a vanishing one acceleration.
inline Regime classify_regime(const TradeoffSpec& spec, double gamma_inf) {
    if (gamma_inf <= 0.0) return Regime::Extinction;
    return regime_limit(spec) > 0.0 ? Regime::Linear : Regime::Accelerating;
}

} // namespace toadlab
