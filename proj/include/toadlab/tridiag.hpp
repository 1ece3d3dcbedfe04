#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "toadlab/errors.hpp"

namespace toadlab {

// Thomas algorithm for diagonally dominant tridiagonal systems.
// sub[0] and sup[n-1] are ignored. Solves in-place into x.
inline void tridiag_solve(const std::vector<double>& sub, const std::vector<double>& diag,
                          const std::vector<double>& sup, const std::vector<double>& rhs,
                          std::vector<double>& x, std::vector<double>& work) {
    const std::size_t n = diag.size();
    work.resize(n);
    x.resize(n);
    double bet = diag[0];
    if (bet == 0.0) throw numeric_error("tridiag_solve: zero pivot");
    x[0] = rhs[0] / bet;
    for (std::size_t j = 1; j < n; ++j) {
        work[j] = sup[j - 1] / bet;
        bet = diag[j] - sub[j] * work[j];
        if (bet == 0.0) throw numeric_error("tridiag_solve: zero pivot");
        x[j] = (rhs[j] - sub[j] * x[j - 1]) / bet;
    }
    for (std::size_t j = n - 1; j-- > 0;)
        x[j] -= work[j + 1] * x[j + 1];
}

// Tridiagonal solve with partial pivoting (stable near-singular shifts for
// inverse iteration). Matrix given by symmetric (diag, off); rhs overwritten.
inline void tridiag_solve_pivoted(std::vector<double> diag, std::vector<double> off,
                                  std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    std::vector<double> sup(n, 0.0), sup2(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) sup[i] = off[i];
    // Forward elimination with row swaps.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double sub = off[i]; // entry (i+1, i)
        if (std::abs(sub) > std::abs(diag[i])) {
            std::swap(diag[i], sub);
            std::swap(sup[i], diag[i + 1]);
            std::swap(sup2[i], sup[i + 1]);
            std::swap(rhs[i], rhs[i + 1]);
        }
        if (diag[i] == 0.0) diag[i] = 1e-300;
        const double f = sub / diag[i];
        diag[i + 1] -= f * sup[i];
        sup[i + 1] -= f * sup2[i];
        rhs[i + 1] -= f * rhs[i];
    }
    if (diag[n - 1] == 0.0) diag[n - 1] = 1e-300;
    rhs[n - 1] /= diag[n - 1];
    if (n >= 2) {
        rhs[n - 2] = (rhs[n - 2] - sup[n - 2] * rhs[n - 1]) / diag[n - 2];
        for (std::size_t i = n - 2; i-- > 0;)
            rhs[i] = (rhs[i] - sup[i] * rhs[i + 1] - sup2[i] * rhs[i + 2]) / diag[i];
    }
}

// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
// below x, by the Sturm sequence of the shifted LDL^T factorization.
inline int sturm_count_below(const std::vector<double>& diag, const std::vector<double>& off,
                             double x) {
    const std::size_t n = diag.size();
    int count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double offsq = (i == 0) ? 0.0 : off[i - 1] * off[i - 1];
        d = diag[i] - x - offsq / d;
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++count;
    }
    return count;
}

} // namespace toadlab
