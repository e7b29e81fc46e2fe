#include "lattice.hpp"

#include <numeric>

namespace normflow::lattice
{

matrix from_int_rows(const std::vector<std::vector<int>> &rows)
{
    matrix m;
    m.reserve(rows.size());
    for (const auto &r : rows) {
        m.emplace_back(r.begin(), r.end());
    }
    return m;
}

namespace
{

// In-place reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(matrix &m, std::size_t cols)
{
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t c = 0; c < cols && row < m.size(); ++c) {
        std::size_t p = row;
        while (p < m.size() && m[p][c].numerator() == 0) {
            ++p;
        }
        if (p == m.size()) {
            continue;
        }
        std::swap(m[p], m[row]);
        const rational inv = rational(1) / m[row][c];
        for (auto &x : m[row]) {
            x *= inv;
        }
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r != row && m[r][c].numerator() != 0) {
                const rational f = m[r][c];
                for (std::size_t cc = 0; cc < m[r].size(); ++cc) {
                    m[r][cc] -= f * m[row][cc];
                }
            }
        }
        pivots.push_back(c);
        ++row;
    }
    return pivots;
}

} // namespace

int rank(matrix m)
{
    if (m.empty()) {
        return 0;
    }
    const auto cols = m.front().size();
    return static_cast<int>(rref(m, cols).size());
}

std::optional<std::vector<rational>> solve_in_span(const matrix &rows, std::span<const int> target)
{
    // Columns are the generators; augmented with the target.
    const std::size_t g = rows.size();
    const std::size_t n = target.size();
    matrix a(n, std::vector<rational>(g + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            a[i][j] = rows[j][i];
        }
        a[i][g] = target[i];
    }
    const auto piv = rref(a, g + 1);
    if (!piv.empty() && piv.back() == g) {
        return std::nullopt;
    }
    std::vector<rational> x(g, rational(0));
    for (std::size_t r = 0; r < piv.size(); ++r) {
        x[piv[r]] = a[r][g];
    }
    return x;
}

std::int64_t gcd_all(std::span<const std::int64_t> v)
{
    std::int64_t g = 0;
    for (auto x : v) {
        g = std::gcd(g, x < 0 ? -x : x);
    }
    return g;
}

std::vector<std::vector<std::int64_t>> integer_kernel(const matrix &rows, std::size_t cols)
{
    matrix m = rows;
    const auto piv = rref(m, cols);
    std::vector<bool> is_pivot(cols, false);
    for (auto c : piv) {
        is_pivot[c] = true;
    }
    std::vector<std::vector<std::int64_t>> basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) {
            continue;
        }
        std::vector<rational> x(cols, rational(0));
        x[free] = 1;
        for (std::size_t r = 0; r < piv.size(); ++r) {
            x[piv[r]] = -m[r][free];
        }
        std::int64_t lcm = 1;
        for (const auto &q : x) {
            lcm = std::lcm(lcm, q.denominator());
        }
        std::vector<std::int64_t> v(cols);
        for (std::size_t i = 0; i < cols; ++i) {
            v[i] = (x[i] * lcm).numerator();
        }
        const auto g = gcd_all(v);
        for (auto &e : v) {
            e /= g;
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace normflow::lattice
