#ifndef QFLOW_MINIMAX_HPP
#define QFLOW_MINIMAX_HPP

// Discrete Chebyshev problem  min_x max_i (b_i - <c_i, x>)  in a handful
// of unknowns, solved exactly as a linear program. The dual
//
//     max sum_i y_i b_i   s.t.  sum_i y_i = 1,  sum_i y_i c_i = 0,  y >= 0
//
// has only m+1 equality rows, so a dense two-phase simplex tableau stays
// tiny even for thousands of points. The primal optimum (t, x) is read off
// the optimal basis as the simplex multipliers.

#include <qflow/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace qflow {

struct MinimaxResult {
    std::vector<double> x;
    double value = 0.0;
    std::vector<int> active; // point indices in the optimal basis
    int iterations = 0;
};

/// c holds M rows of length m (row-major), b holds M values.
inline MinimaxResult minimax(int m, std::span<const double> c, std::span<const double> b,
                             int max_iterations = 10000)
{
    const int npts = static_cast<int>(b.size());
    if (m < 1 || static_cast<int>(c.size()) != npts * m || npts < m + 1)
        throw DomainError("minimax: inconsistent problem dimensions");

    const int rows = m + 1;
    const int cols = npts + rows; // structural + artificial
    // Tableau rows: coefficients (cols) then rhs.
    std::vector<double> tab(static_cast<std::size_t>(rows) * (cols + 1), 0.0);
    auto T = [&](int r, int j) -> double& { return tab[static_cast<std::size_t>(r) * (cols + 1) + j]; };
    auto column_entry = [&](int r, int j) {
        return r == 0 ? 1.0 : c[static_cast<std::size_t>(j) * m + (r - 1)];
    };

    double scale = 1.0;
    for (int j = 0; j < npts; ++j) {
        for (int r = 0; r < rows; ++r) {
            T(r, j) = column_entry(r, j);
            scale = std::max(scale, std::abs(T(r, j)));
        }
    }
    for (int r = 0; r < rows; ++r)
        T(r, npts + r) = 1.0;
    T(0, cols) = 1.0;

    std::vector<int> basis(rows);
    for (int r = 0; r < rows; ++r)
        basis[r] = npts + r;

    const double tol = 1e-12 * scale;
    int iterations = 0;
    bool last_degenerate = false;

    auto pivot = [&](int pr, int pc) {
        const double p = T(pr, pc);
        for (int j = 0; j <= cols; ++j)
            T(pr, j) /= p;
        for (int r = 0; r < rows; ++r) {
            if (r == pr)
                continue;
            const double f = T(r, pc);
            if (f == 0.0)
                continue;
            for (int j = 0; j <= cols; ++j)
                T(r, j) -= f * T(pr, j);
        }
        basis[pr] = pc;
    };

    // Maximise cost . y over the columns allowed to enter.
    auto run_phase = [&](auto cost, int entering_limit) {
        while (true) {
            if (++iterations > max_iterations)
                throw NumericError("minimax: simplex iteration limit reached");
            int enter = -1;
            double best = tol;
            for (int j = 0; j < entering_limit; ++j) {
                double d = cost(j);
                for (int r = 0; r < rows; ++r)
                    d -= cost(basis[r]) * T(r, j);
                if (d > best) {
                    enter = j;
                    best = d;
                    if (last_degenerate)
                        break; // Bland's rule while stalling
                }
            }
            if (enter < 0)
                return;
            int leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (int r = 0; r < rows; ++r) {
                const double a = T(r, enter);
                if (a > tol) {
                    const double q = T(r, cols) / a;
                    if (q < ratio - 1e-15 || (q <= ratio + 1e-15 && leave >= 0 && basis[r] < basis[leave])) {
                        ratio = q;
                        leave = r;
                    }
                }
            }
            if (leave < 0)
                throw NumericError("minimax: unbounded dual (points do not surround the origin)");
            last_degenerate = ratio <= 1e-15;
            pivot(leave, enter);
        }
    };

    // Phase 1: drive artificials out.
    run_phase([&](int j) { return j >= npts ? -1.0 : 0.0; }, cols);
    double infeasibility = 0.0;
    for (int r = 0; r < rows; ++r)
        if (basis[r] >= npts)
            infeasibility += T(r, cols);
    if (infeasibility > 1e-9)
        throw NumericError("minimax: infeasible dual (points do not surround the origin)");
    for (int r = 0; r < rows; ++r) {
        if (basis[r] < npts)
            continue;
        for (int j = 0; j < npts; ++j) {
            if (std::abs(T(r, j)) > tol) {
                pivot(r, j);
                break;
            }
        }
    }

    // Phase 2 over structural columns only.
    last_degenerate = false;
    run_phase([&](int j) { return j < npts ? b[j] : 0.0; }, npts);

    // Multipliers: pi . A_j = cost_j for every basic column.
    Eigen::MatrixXd bt(rows, rows);
    Eigen::VectorXd rhs(rows);
    for (int r = 0; r < rows; ++r) {
        const int j = basis[r];
        for (int q = 0; q < rows; ++q)
            bt(r, q) = (j < npts) ? column_entry(q, j) : (q == j - npts ? 1.0 : 0.0);
        rhs(r) = (j < npts) ? b[j] : 0.0;
    }
    const Eigen::VectorXd pi = bt.fullPivLu().solve(rhs);

    MinimaxResult res;
    res.iterations = iterations;
    res.x.assign(pi.data() + 1, pi.data() + rows);
    double value = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < npts; ++i) {
        double v = b[i];
        for (int a = 0; a < m; ++a)
            v -= c[static_cast<std::size_t>(i) * m + a] * res.x[a];
        value = std::max(value, v);
    }
    res.value = value;
    for (int r = 0; r < rows; ++r)
        if (basis[r] < npts)
            res.active.push_back(basis[r]);
    std::sort(res.active.begin(), res.active.end());
    return res;
}

} // namespace qflow

#endif
