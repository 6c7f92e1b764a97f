#include "envcontour/linprog.hpp"

#include <cmath>
#include <limits>

namespace envc {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

struct Tableau {
    int m, n;           // constraint rows, structural columns
    Mat t;              // m x (n + m): structural then artificial columns
    Vec rhs;
    std::vector<int> basis;

    void pivot(int row, int col) {
        const double p = t(row, col);
        for (int j = 0; j < t.cols; ++j) t(row, j) /= p;
        rhs[row] /= p;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = t(i, col);
            if (f == 0.0) continue;
            for (int j = 0; j < t.cols; ++j) t(i, j) -= f * t(row, j);
            rhs[i] -= f * rhs[row];
        }
        basis[row] = col;
    }
};

// One simplex phase over the given cost vector. Columns >= col_limit may not
// enter the basis. Returns false when the problem is unbounded below.
bool run_phase(Tableau& tab, const Vec& cost, int col_limit) {
    const int max_iter = 50 * (tab.m + tab.n + 16);
    for (int iter = 0; iter < max_iter; ++iter) {
        // reduced costs via multipliers y solved from the basis rows
        Vec y(tab.m, 0.0);
        for (int i = 0; i < tab.m; ++i) y[i] = cost[tab.basis[i]];
        // tableau is kept in canonical form, so reduced cost of column j is
        // cost[j] - sum_i y[i] * t(i, j)
        int enter = -1;
        for (int j = 0; j < col_limit; ++j) {
            double r = cost[j];
            for (int i = 0; i < tab.m; ++i) r -= y[i] * tab.t(i, j);
            if (r < -kPivotTol) { enter = j; break; }  // Bland: first improving index
        }
        if (enter < 0) return true;  // optimal

        int leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < tab.m; ++i) {
            const double a = tab.t(i, enter);
            if (a > kPivotTol) {
                const double ratio = tab.rhs[i] / a;
                if (ratio < best - 1e-15 ||
                    (ratio < best + 1e-15 && (leave < 0 || tab.basis[i] < tab.basis[leave]))) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return false;  // unbounded
        tab.pivot(leave, enter);
    }
    return true;  // iteration cap; treat current point as optimal
}

}  // namespace

LpResult simplex_solve(const Mat& a, const Vec& b, const Vec& c) {
    const int m = a.rows, n = a.cols;
    Tableau tab;
    tab.m = m;
    tab.n = n;
    tab.t = Mat(m, n + m);
    tab.rhs = b;
    tab.basis.resize(m);

    for (int i = 0; i < m; ++i) {
        const double sgn = (b[i] < 0.0) ? -1.0 : 1.0;
        tab.rhs[i] = sgn * b[i];
        for (int j = 0; j < n; ++j) tab.t(i, j) = sgn * a(i, j);
        tab.t(i, n + i) = 1.0;
        tab.basis[i] = n + i;
    }

    LpResult res;

    // phase 1: minimize the artificial sum
    Vec cost1(n + m, 0.0);
    for (int i = 0; i < m; ++i) cost1[n + i] = 1.0;
    run_phase(tab, cost1, n + m);
    double art = 0.0;
    for (int i = 0; i < m; ++i)
        if (tab.basis[i] >= n) art += tab.rhs[i];
    if (art > kFeasTol) {
        res.status = LpResult::Status::infeasible;
        return res;
    }
    // drive residual artificials out of the basis where possible
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) continue;
        for (int j = 0; j < n; ++j)
            if (std::fabs(tab.t(i, j)) > kPivotTol) {
                tab.pivot(i, j);
                break;
            }
    }

    // phase 2
    Vec cost2(n + m, 0.0);
    for (int j = 0; j < n; ++j) cost2[j] = c[j];
    if (!run_phase(tab, cost2, n)) {
        res.status = LpResult::Status::unbounded;
        return res;
    }

    res.status = LpResult::Status::optimal;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.rhs[i];
    res.value = dot(res.x, c);

    // multipliers: reduced cost of artificial column i is -y_i (its original
    // column was the i-th unit vector, up to the sign flip applied to row i)
    res.dual.assign(m, 0.0);
    Vec y(m, 0.0);
    for (int i = 0; i < m; ++i) y[i] = cost2[tab.basis[i]];
    for (int i = 0; i < m; ++i) {
        double r = 0.0;
        for (int k = 0; k < m; ++k) r += y[k] * tab.t(k, n + i);
        res.dual[i] = (b[i] < 0.0 ? -r : r);
    }
    return res;
}

}  // namespace envc
