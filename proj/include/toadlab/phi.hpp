#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "toadlab/errors.hpp"
#include "toadlab/quadrature.hpp"
#include "toadlab/tradeoff.hpp"

namespace toadlab {

// Cumulative action of the trait direction, Phi(theta) = integral of
// sqrt(m) from the trait floor, and its inverse eta_a(t) solving
// Phi(eta) = a*t. Phi sets the trait-spreading scale; the space front of an
// accelerating run sits at eta(t)^{3/2}.
//
// The profile precomputes a geometric anchor table once at construction and
// is immutable afterwards, so instances can be shared across workers.
class PhiProfile {
public:
    static constexpr double kQuadRelTol = 1e-10;
    static constexpr double kEtaRelTol = 1e-9;

    explicit PhiProfile(TradeoffSpec spec, double prebuild_to = 1e7)
        : spec_(std::move(spec)) {
        build_anchors(prebuild_to);
    }

    const TradeoffSpec& spec() const { return spec_; }
    double theta_min() const { return spec_.theta_min; }

    double phi(double theta) const {
        const double tl = spec_.theta_min;
        if (theta < tl) throw std::domain_error("phi: theta below trait floor");
        if (theta == tl) return 0.0;
        if (spec_.kind == TradeoffKind::Zero) return 0.0;
        // Elementary antiderivatives where sqrt(m) allows one.
        if (spec_.kind == TradeoffKind::PowerLaw && spec_.p == 1.0)
            return std::sqrt(spec_.C) * (2.0 / 3.0) * std::pow(theta - tl, 1.5);
        if (spec_.kind == TradeoffKind::LinearPlus && !spec_.sub)
            return spec_.mu * (2.0 / 3.0) * std::pow(theta - tl, 1.5);
        if (spec_.kind == TradeoffKind::PowerLaw && spec_.p == 2.0) {
            // integral of sqrt(C) sqrt(s^2 - tl^2) ds
            const double r = std::sqrt(theta * theta - tl * tl);
            return std::sqrt(spec_.C) * 0.5 *
                   (theta * r - tl * tl * std::log((theta + r) / tl));
        }
        // Start from the largest precomputed anchor below theta.
        double base_theta = tl;
        double base_phi = 0.0;
        auto it = std::upper_bound(anchors_.begin(), anchors_.end(),
                                   std::make_pair(theta, std::numeric_limits<double>::max()));
        if (it != anchors_.begin()) {
            --it;
            base_theta = it->first;
            base_phi = it->second;
        }
        if (base_theta == theta) return base_phi;
        return base_phi + integrate_sqrt_m(base_theta, theta);
    }

    // eta_a(t): unique root of Phi(eta) = a*t, by bracketed bisection with
    // geometric bracket growth from the trait floor.
    double eta(double a, double t) const {
        if (spec_.kind == TradeoffKind::Zero)
            throw std::domain_error("eta undefined: trade-off is identically zero");
        if (!(a > 0.0) || !(t > 0.0))
            throw std::domain_error("eta: requires a > 0 and t > 0");
        const double target = a * t;
        const double tol = kEtaRelTol * std::max(1.0, target);
        const double tl = spec_.theta_min;
        double lo = tl;
        double step = std::max(1.0, tl);
        double hi = tl + step;
        while (phi(hi) < target) {
            lo = hi;
            step *= 2.0;
            hi = tl + step;
            if (!std::isfinite(hi)) throw numeric_error("eta: bracket growth overflow");
        }
        double flo = phi(lo) - target;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = phi(mid) - target;
            if (std::abs(fm) <= tol) return mid;
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi))
                break;
        }
        const double eta_val = 0.5 * (lo + hi);
        if (std::abs(phi(eta_val) - target) > 16.0 * tol)
            throw numeric_error("eta: bisection failed to meet tolerance");
        return eta_val;
    }

    double eta1(double t) const { return eta(1.0, t); }

    // Empirical constant D_m in theta*sqrt(m) <= D_m * Phi, sampled over
    // [2*theta_d, theta_hi]. Sub-linear specs only; reported, not pinned.
    double empirical_Dm(double theta_hi = 1e6) const {
        const double td = theta_d(spec_);
        double dm = 1.0;
        for (double th = 2.0 * td; th <= theta_hi; th *= 1.25) {
            const double num = th * std::sqrt(eval_m(spec_, th));
            const double den = phi(th);
            if (den > 0.0) dm = std::max(dm, num / den);
        }
        return dm;
    }

private:
    void build_anchors(double prebuild_to) {
        if (spec_.kind == TradeoffKind::Zero) return;
        const double tl = spec_.theta_min;
        anchors_.reserve(70);
        double acc = 0.0;
        double prev = tl;
        for (double d = std::max(tl, 1.0) * 0.5; tl + d <= prebuild_to; d *= 2.0) {
            const double th = tl + d;
            acc += integrate_sqrt_m(prev, th);
            anchors_.emplace_back(th, acc);
            prev = th;
        }
    }

    double integrate_sqrt_m(double a, double b) const {
        return adaptive_simpson([this](double s) { return std::sqrt(eval_m(spec_, s)); },
                                a, b, kQuadRelTol);
    }

    TradeoffSpec spec_;
    std::vector<std::pair<double, double>> anchors_;
};

// Convenience free functions mirroring the profile methods.
inline double eval_phi(const PhiProfile& profile, double theta) { return profile.phi(theta); }
inline double eta(const PhiProfile& profile, double a, double t) { return profile.eta(a, t); }

} // namespace toadlab
