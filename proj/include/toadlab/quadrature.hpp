#pragma once

#include <cmath>
#include <functional>

#include "toadlab/errors.hpp"

namespace toadlab {

namespace detail {

template <class F>
double simpson_panel(F&& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_panel(f, a, fa, m, fm, lm, flm);
    const double right = simpson_panel(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0)
        throw numeric_error("adaptive_simpson: max recursion depth reached");
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson quadrature with relative tolerance. The integrand is
// assumed finite on [a, b]; endpoint derivative singularities (e.g. sqrt)
// are handled by the recursion.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = detail::simpson_panel(f, a, fa, b, fb, m, fm);
    const double scale = std::max({std::abs(whole), std::abs(b - a) * std::abs(fm), 1e-300});
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, rel_tol * scale, 60);
}

} // namespace toadlab
