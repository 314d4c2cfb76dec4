#pragma once

#include <cstddef>
#include <vector>

#include <lapacke.h>

namespace fpp::detail {

/**
 * Tridiagonal system A x = rhs.
 *
 * Row i reads lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1];
 * lower[0] and upper[n-1] are ignored.
 */
struct Tridiagonal {
    explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0) {}

    std::size_t size() const noexcept { return diag.size(); }

    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
    std::vector<double> rhs;
};

/// Solves in place (LAPACK dgtsv, partial pivoting); the solution replaces
/// `sys.rhs`. Returns false if the matrix is singular.
inline bool solve_in_place(Tridiagonal& sys)
{
    const auto n = static_cast<lapack_int>(sys.size());
    // dgtsv wants the off-diagonals packed without the unused ends.
    std::vector<double> dl(sys.lower.begin() + 1, sys.lower.end());
    std::vector<double> du(sys.upper.begin(), sys.upper.end() - 1);
    const lapack_int info =
        LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), sys.diag.data(), du.data(), sys.rhs.data(), n);
    return info == 0;
}

}  // namespace fpp::detail
