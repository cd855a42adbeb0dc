#include "drl/validity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace drl {

namespace {

constexpr double kPivotTol = 1e-9;

// Dense tableau simplex on: A lambda = rhs, lambda >= 0, maximize c . lambda.
// Rows of A are the variables plus a final sum-to-one row. Returns the basic
// columns of an optimal basis, or nothing when infeasible in floating point.
struct Tableau {
    std::size_t rows;
    std::size_t cols;  // structural + artificial
    std::vector<double> t;  // (rows + 1) x (cols + 1); last row objective, last column rhs
    std::vector<std::size_t> basis;

    double& at(std::size_t r, std::size_t c) { return t[r * (cols + 1) + c]; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double p = at(pr, pc);
        for (std::size_t c = 0; c <= cols; ++c) at(pr, c) /= p;
        for (std::size_t r = 0; r <= rows; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0) continue;
            for (std::size_t c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
        }
        basis[pr] = pc;
    }

    // Minimizes the objective row (reduced costs in the last row) using
    // Bland's rule over the columns allowed by `usable`.
    bool run(std::size_t usable) {
        for (std::size_t iter = 0; iter < 500; ++iter) {
            std::size_t pc = usable;
            for (std::size_t c = 0; c < usable; ++c) {
                if (at(rows, c) < -kPivotTol) {
                    pc = c;
                    break;
                }
            }
            if (pc == usable) return true;
            std::size_t pr = rows;
            double best = 0;
            for (std::size_t r = 0; r < rows; ++r) {
                const double a = at(r, pc);
                if (a <= kPivotTol) continue;
                const double ratio = at(r, cols) / a;
                if (pr == rows || ratio < best - 1e-12 || (std::fabs(ratio - best) <= 1e-12 && basis[r] < basis[pr])) {
                    pr = r;
                    best = ratio;
                }
            }
            if (pr == rows) return false;  // unbounded; cannot happen with the sum row
            pivot(pr, pc);
        }
        return false;
    }
};

// Exact solve of A_B lambda_B = rhs; true when the solution is unique,
// non-negative and gives a non-negative combination of the biases.
bool verify(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& bias,
            const std::vector<std::size_t>& cols) {
    const std::size_t m = a.size();  // rows including the sum row
    const std::size_t n = cols.size();
    std::vector<std::vector<Rational>> mat(m, std::vector<Rational>(n + 1));
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < n; ++j) mat[r][j] = a[r][cols[j]];
        mat[r][n] = r + 1 == m ? 1 : 0;
    }
    std::size_t row = 0;
    std::vector<std::size_t> pivot_col;
    for (std::size_t c = 0; c < n && row < m; ++c) {
        std::size_t p = row;
        while (p < m && sgn(mat[p][c]) == 0) ++p;
        if (p == m) return false;  // rank deficient: not unique
        std::swap(mat[p], mat[row]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r == row || sgn(mat[r][c]) == 0) continue;
            const Rational f = mat[r][c] / mat[row][c];
            for (std::size_t k = c; k <= n; ++k) mat[r][k] -= f * mat[row][k];
        }
        pivot_col.push_back(c);
        ++row;
    }
    if (pivot_col.size() != n) return false;
    for (std::size_t r = row; r < m; ++r) {
        if (sgn(mat[r][n]) != 0) return false;  // inconsistent
    }
    Rational combined = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const Rational lambda = mat[j][n] / mat[j][j];
        if (sgn(lambda) < 0) return false;
        combined += lambda * bias[cols[j]];
    }
    return sgn(combined) >= 0;
}

}  // namespace

bool proven_valid(std::span<const Inequality* const> disjuncts) {
    const std::size_t n = disjuncts.size();
    if (n == 0) return false;
    for (const Inequality* d : disjuncts) {
        if (d->is_tautology()) return true;
    }
    if (n == 1) return false;

    std::vector<VarIndex> vars;
    for (const Inequality* d : disjuncts)
        for (const auto& t : d->expr().terms()) vars.push_back(t.var);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    const std::size_t m = vars.size() + 1;

    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(n));
    std::vector<Rational> bias(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (const auto& t : disjuncts[k]->expr().terms()) {
            const auto r = static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), t.var) - vars.begin());
            a[r][k] = t.coeff;
        }
        a[m - 1][k] = 1;
        bias[k] = disjuncts[k]->expr().bias();
    }

    // Phase 1 over structural columns 0..n-1 and artificials n..n+m-1.
    Tableau tab{m, n + m, std::vector<double>((m + 1) * (n + m + 1), 0.0), std::vector<std::size_t>(m)};
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t k = 0; k < n; ++k) tab.at(r, k) = a[r][k].get_d();
        tab.at(r, n + r) = 1.0;
        tab.at(r, n + m) = r + 1 == m ? 1.0 : 0.0;
        tab.basis[r] = n + r;
    }
    // Objective: minimize the sum of artificials, written in reduced form.
    for (std::size_t c = 0; c <= n + m; ++c) {
        if (c >= n && c < n + m) continue;
        double s = 0;
        for (std::size_t r = 0; r < m; ++r) s += tab.at(r, c);
        tab.at(m, c) = -s;
    }
    if (!tab.run(n + m)) return false;
    if (-tab.at(m, n + m) > 1e-9) return false;  // no convex combination vanishes

    // Phase 2: maximize bias . lambda, i.e. minimize -bias . lambda, over
    // structural columns only.
    for (std::size_t c = 0; c <= n + m; ++c) tab.at(m, c) = 0.0;
    for (std::size_t k = 0; k < n; ++k) tab.at(m, k) = -bias[k].get_d();
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t b = tab.basis[r];
        const double cb = b < n ? -bias[b].get_d() : 0.0;
        if (cb == 0) continue;
        for (std::size_t c = 0; c <= n + m; ++c) tab.at(m, c) -= cb * tab.at(r, c);
    }
    tab.run(n);

    std::vector<std::size_t> cols;
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis[r] < n) cols.push_back(tab.basis[r]);
    }
    std::sort(cols.begin(), cols.end());
    return verify(a, bias, cols);
}

bool proven_valid(std::span<const Inequality> disjuncts) {
    std::vector<const Inequality*> ptrs;
    for (const auto& d : disjuncts) ptrs.push_back(&d);
    return proven_valid(std::span<const Inequality* const>(ptrs));
}

}  // namespace drl
