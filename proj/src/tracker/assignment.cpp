#include "tracklab/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace tracklab {

int Assignment::matched() const {
    return static_cast<int>(std::count_if(row_to_col.begin(), row_to_col.end(),
                                          [](int c) { return c >= 0; }));
}

namespace {

// Shortest augmenting path with potentials for n <= m, 1-based internally.
// Returns col assigned to each row (0-based).
std::vector<int> solve_rows_le_cols(const std::vector<double>& a, int n, int m) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a[static_cast<std::size_t>(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

Assignment hungarian(const CostMatrix& cost) {
    Assignment out;
    const int rows = cost.rows();
    const int cols = cost.cols();
    out.row_to_col.assign(rows, -1);
    if (cost.empty()) return out;

    // Forbidden pairs get a cost larger than any sum of finite entries so the
    // solver only uses them when nothing finite is left.
    double span = 0.0;
    double lo = 0.0;
    bool any_finite = false;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double x = cost(r, c);
            if (!std::isfinite(x)) continue;
            if (!any_finite || x < lo) lo = x;
            any_finite = true;
        }
    }
    if (!any_finite) return out;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double x = cost(r, c);
            if (std::isfinite(x)) span += x - lo;
        }
    }
    const double big = lo + 2.0 * span + 1.0;

    const bool transpose = rows > cols;
    const int n = transpose ? cols : rows;
    const int m = transpose ? rows : cols;
    std::vector<double> a(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double x = transpose ? cost(j, i) : cost(i, j);
            a[static_cast<std::size_t>(i) * m + j] = std::isfinite(x) ? x : big;
        }
    }
    const std::vector<int> sol = solve_rows_le_cols(a, n, m);
    for (int i = 0; i < n; ++i) {
        const int j = sol[i];
        if (j < 0) continue;
        const int r = transpose ? j : i;
        const int c = transpose ? i : j;
        if (!std::isfinite(cost(r, c))) continue;
        out.row_to_col[r] = c;
        out.total_cost += cost(r, c);
    }
    return out;
}

Matching linear_assignment(const CostMatrix& cost, double threshold) {
    Matching out;
    const int n = cost.rows();
    const int m = cost.cols();
    if (n == 0 || m == 0) {
        for (int r = 0; r < n; ++r) out.unmatched_rows.push_back(r);
        for (int c = 0; c < m; ++c) out.unmatched_cols.push_back(c);
        return out;
    }
    // [ C      D_r ]   D_r: row i left unmatched, threshold/2 on the diagonal
    // [ D_c    0   ]   D_c: column j left unmatched
    const int size = n + m;
    const double half = threshold / 2.0;
    CostMatrix ext(size, size, kInfCost);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < m; ++c) {
            const double x = cost(r, c);
            if (std::isfinite(x) && x <= threshold) ext(r, c) = x;
        }
        ext(r, m + r) = half;
    }
    for (int c = 0; c < m; ++c) {
        ext(n + c, c) = half;
        for (int r = 0; r < n; ++r) ext(n + c, m + r) = 0.0;
    }
    const Assignment a = hungarian(ext);
    std::vector<char> col_used(m, 0);
    for (int r = 0; r < n; ++r) {
        const int c = a.row_to_col[r];
        if (c >= 0 && c < m) {
            out.matches.emplace_back(r, c);
            col_used[c] = 1;
        } else {
            out.unmatched_rows.push_back(r);
        }
    }
    for (int c = 0; c < m; ++c) {
        if (!col_used[c]) out.unmatched_cols.push_back(c);
    }
    return out;
}

}  // namespace tracklab
