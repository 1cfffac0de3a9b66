#include "potflow/simplex.hpp"

#include "potflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace potflow {

namespace {

constexpr double kReducedCostTol = 1e-10;
constexpr double kPivotTol = 1e-9;
constexpr int kMaxIterations = 200000;

// Dense LU with partial pivoting; solves in place, returns false on a
// (numerically) singular matrix.
bool lu_solve(std::vector<std::vector<double>> a, std::vector<double>& x) {
    const int n = static_cast<int>(a.size());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-14) return false;
        std::swap(a[col], a[piv]);
        std::swap(perm[col], perm[piv]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            a[r][col] = f;
            for (int c = col + 1; c < n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = x[perm[i]];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) b[i] -= a[i][j] * b[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) b[i] -= a[i][j] * b[j];
        b[i] /= a[i][i];
    }
    x = b;
    return true;
}

struct Tableau {
    int rows = 0;  // constraints
    int ncols = 0; // structural + artificial
    std::vector<std::vector<double>> t; // rows+1 x ncols+1; last row = reduced costs
    std::vector<int> basis;

    double rhs(int i) const { return t[i][ncols]; }
    double objective() const { return -t[rows][ncols]; }

    void pivot(int leave, int enter) {
        auto& prow = t[leave];
        const double p = prow[enter];
        for (double& v : prow) v /= p;
        prow[enter] = 1.0; // kill round-off on the pivot itself
        for (int i = 0; i <= rows; ++i) {
            if (i == leave) continue;
            const double f = t[i][enter];
            if (f == 0.0) continue;
            auto& row = t[i];
            for (int j = 0; j <= ncols; ++j) row[j] -= f * prow[j];
            row[enter] = 0.0;
        }
        basis[leave] = enter;
    }

    // Rebuild the reduced-cost row for cost vector c (over all ncols columns).
    void price(const std::vector<double>& c) {
        auto& red = t[rows];
        for (int j = 0; j < ncols; ++j) red[j] = c[j];
        red[ncols] = 0.0;
        for (int i = 0; i < rows; ++i) {
            const double cb = c[basis[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j <= ncols; ++j) red[j] -= cb * t[i][j];
        }
    }

    // Bland's rule: smallest eligible entering index, ties on the leaving row
    // broken by smallest basis index. Guarantees termination under degeneracy.
    int run(const std::vector<char>& allowed) {
        int iters = 0;
        for (;; ++iters) {
            if (iters > kMaxIterations)
                throw Error(ErrorCode::NumericFailure, "simplex iteration limit hit");
            int enter = -1;
            for (int j = 0; j < ncols; ++j)
                if (allowed[j] && t[rows][j] < -kReducedCostTol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return iters;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows; ++i) {
                const double a = t[i][enter];
                if (a <= kPivotTol) continue;
                const double ratio = rhs(i) / a;
                if (ratio < best ||
                    (ratio == best && leave >= 0 && basis[i] < basis[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave < 0)
                throw Error(ErrorCode::NumericFailure,
                            "unbounded pivot direction in a bounded program");
            pivot(leave, enter);
        }
    }
};

} // namespace

LpSolution solve_min_time_lp(const LpProblem& problem) {
    const int m = static_cast<int>(problem.rhs.size());
    const int n = static_cast<int>(problem.columns.size());
    for (const auto& col : problem.columns)
        if (static_cast<int>(col.size()) != m)
            throw Error(ErrorCode::InvalidArgument, "column length does not match rhs");
    double rhs_norm = 0.0;
    for (const double b : problem.rhs) {
        if (!(b >= 0.0) || !std::isfinite(b))
            throw Error(ErrorCode::InvalidArgument, "rhs entries must be finite and >= 0");
        rhs_norm += b;
    }

    LpSolution sol;
    sol.weights.assign(n, 0.0);
    sol.dual.assign(m, 0.0);
    if (m == 0) return sol;

    Tableau tab;
    tab.rows = m;
    tab.ncols = n + m;
    tab.t.assign(m + 1, std::vector<double>(tab.ncols + 1, 0.0));
    tab.basis.resize(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) tab.t[i][j] = problem.columns[j][i];
        tab.t[i][n + i] = 1.0;
        tab.t[i][tab.ncols] = problem.rhs[i];
        tab.basis[i] = n + i;
    }

    std::vector<double> phase1_cost(tab.ncols, 0.0);
    for (int j = n; j < tab.ncols; ++j) phase1_cost[j] = 1.0;
    std::vector<char> allowed(tab.ncols, 1);
    tab.price(phase1_cost);
    sol.iterations += tab.run(allowed);
    if (tab.objective() > 1e-8 * std::max(1.0, rhs_norm))
        throw Error(ErrorCode::Infeasible,
                    "demands are not reachable by any mix of configurations");

    // Drive leftover artificials out of the basis where possible; rows where
    // no structural pivot exists are redundant and stay parked at zero.
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) continue;
        for (int j = 0; j < n; ++j)
            if (std::abs(tab.t[i][j]) > kPivotTol) {
                tab.pivot(i, j);
                break;
            }
    }

    std::vector<double> phase2_cost(tab.ncols, 0.0);
    for (int j = 0; j < n; ++j) phase2_cost[j] = 1.0;
    for (int j = n; j < tab.ncols; ++j) allowed[j] = 0;
    tab.price(phase2_cost);
    sol.iterations += tab.run(allowed);

    // Re-solve the final basis against the original data; the tableau has
    // accumulated eliminations and this removes their round-off.
    std::vector<std::vector<double>> bmat(m, std::vector<double>(m, 0.0));
    std::vector<std::vector<double>> bmat_t(m, std::vector<double>(m, 0.0));
    for (int r = 0; r < m; ++r) {
        const int j = tab.basis[r];
        for (int i = 0; i < m; ++i) {
            const double v = j < n ? problem.columns[j][i] : (i == j - n ? 1.0 : 0.0);
            bmat[i][r] = v;
            bmat_t[r][i] = v;
        }
    }
    std::vector<double> xb = problem.rhs;
    std::vector<double> cb(m);
    for (int r = 0; r < m; ++r) cb[r] = tab.basis[r] < n ? 1.0 : 0.0;
    std::vector<double> y = cb;
    const bool refined = lu_solve(bmat, xb) && lu_solve(bmat_t, y);

    if (refined) {
        for (int r = 0; r < m; ++r)
            if (tab.basis[r] < n) sol.weights[tab.basis[r]] = std::max(0.0, xb[r]);
        sol.dual = y;
    } else {
        for (int r = 0; r < m; ++r)
            if (tab.basis[r] < n)
                sol.weights[tab.basis[r]] = std::max(0.0, tab.rhs(r));
    }
    for (const double w : sol.weights) sol.objective += w;

    double yb = 0.0;
    for (int i = 0; i < m; ++i) yb += sol.dual[i] * problem.rhs[i];
    sol.duality_gap = std::abs(sol.objective - yb);
    if (refined && sol.duality_gap > 1e-10 * std::max(1.0, sol.objective))
        throw Error(ErrorCode::NumericFailure, "optimality certificate failed");
    return sol;
}

} // namespace potflow
