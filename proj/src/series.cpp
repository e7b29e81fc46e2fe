#include <normflow/series.hpp>

#include <algorithm>
#include <cmath>

#include <normflow/errors.hpp>

namespace normflow
{

formal_series::formal_series(std::size_t n, int truncation) : m_n(n), m_K(truncation)
{
    if (n == 0 || n > multi_index::max_dof) {
        throw dimension_error("formal_series: unsupported number of degrees of freedom");
    }
    if (truncation < 0) {
        throw domain_error("formal_series: truncation degree must be nonnegative");
    }
}

void formal_series::check_index(const multi_index &k) const
{
    if (k.n() != m_n) {
        throw dimension_error("formal_series: index " + k.to_string() + " has wrong dimension");
    }
}

complex formal_series::coeff(const multi_index &k) const
{
    check_index(k);
    const auto it = m_coeffs.find(k);
    return it == m_coeffs.end() ? complex{} : it->second;
}

void formal_series::set(const multi_index &k, complex c)
{
    check_index(k);
    if (k.degree() > m_K) {
        if (c != complex{}) {
            m_touched = true;
        }
        return;
    }
    if (c == complex{}) {
        m_coeffs.erase(k);
    } else {
        m_coeffs[k] = c;
    }
}

void formal_series::add_to(const multi_index &k, complex c)
{
    check_index(k);
    if (k.degree() > m_K) {
        if (c != complex{}) {
            m_touched = true;
        }
        return;
    }
    auto [it, inserted] = m_coeffs.try_emplace(k, c);
    if (!inserted) {
        it->second += c;
        if (it->second == complex{}) {
            m_coeffs.erase(it);
        }
    } else if (c == complex{}) {
        m_coeffs.erase(it);
    }
}

std::optional<int> formal_series::min_degree() const
{
    std::optional<int> d;
    for (const auto &[k, c] : m_coeffs) {
        const int kd = k.degree();
        if (!d || kd < *d) {
            d = kd;
        }
    }
    return d;
}

std::optional<int> formal_series::max_degree() const
{
    std::optional<int> d;
    for (const auto &[k, c] : m_coeffs) {
        const int kd = k.degree();
        if (!d || kd > *d) {
            d = kd;
        }
    }
    return d;
}

bool formal_series::in_f_diamond() const
{
    const auto d = min_degree();
    return !d || *d >= 3;
}

formal_series formal_series::degree_range(int lo, int hi) const
{
    formal_series out(m_n, m_K);
    for (const auto &[k, c] : m_coeffs) {
        const int d = k.degree();
        if (d >= lo && d <= hi) {
            out.m_coeffs.emplace_hint(out.m_coeffs.end(), k, c);
        }
    }
    return out;
}

formal_series formal_series::truncated(int K) const
{
    formal_series out(m_n, K);
    out.m_touched = m_touched;
    for (const auto &[k, c] : m_coeffs) {
        out.set(k, c);
    }
    return out;
}

formal_series formal_series::pruned(double eps) const
{
    formal_series out(m_n, m_K);
    out.m_touched = m_touched;
    for (const auto &[k, c] : m_coeffs) {
        if (std::abs(c) > eps) {
            out.m_coeffs.emplace_hint(out.m_coeffs.end(), k, c);
        }
    }
    return out;
}

complex formal_series::evaluate(std::span<const complex> z, std::span<const complex> zbar) const
{
    if (z.size() != m_n || zbar.size() != m_n) {
        throw dimension_error("formal_series::evaluate: point has wrong dimension");
    }
    complex s{};
    for (const auto &[k, c] : m_coeffs) {
        complex m = c;
        for (std::size_t j = 0; j < m_n; ++j) {
            for (int e = 0; e < k.k(j); ++e) {
                m *= z[j];
            }
            for (int e = 0; e < k.kbar(j); ++e) {
                m *= zbar[j];
            }
        }
        s += m;
    }
    return s;
}

namespace
{

void require_same_n(const formal_series &a, const formal_series &b, const char *op)
{
    if (a.n() != b.n()) {
        throw dimension_error(std::string(op) + ": operands have different numbers of degrees of freedom");
    }
}

} // namespace

formal_series series_add(const formal_series &a, const formal_series &b)
{
    require_same_n(a, b, "series_add");
    formal_series out(a.n(), std::min(a.truncation(), b.truncation()));
    if (a.truncation_touched() || b.truncation_touched()) {
        out.mark_truncation_touched();
    }
    for (const auto &[k, c] : a) {
        out.add_to(k, c);
    }
    for (const auto &[k, c] : b) {
        out.add_to(k, c);
    }
    return out;
}

formal_series series_sub(const formal_series &a, const formal_series &b)
{
    return series_add(a, series_scale(b, -1.0));
}

formal_series series_scale(const formal_series &a, complex s)
{
    formal_series out(a.n(), a.truncation());
    if (a.truncation_touched()) {
        out.mark_truncation_touched();
    }
    for (const auto &[k, c] : a) {
        out.add_to(k, c * s);
    }
    return out;
}

formal_series series_mul(const formal_series &a, const formal_series &b)
{
    require_same_n(a, b, "series_mul");
    formal_series out(a.n(), std::min(a.truncation(), b.truncation()));
    if (a.truncation_touched() || b.truncation_touched()) {
        out.mark_truncation_touched();
    }
    for (const auto &[ka, ca] : a) {
        for (const auto &[kb, cb] : b) {
            out.add_to(ka + kb, ca * cb);
        }
    }
    return out;
}

formal_series series_derivative(const formal_series &a, std::size_t j, bool conjugate)
{
    if (j >= a.n()) {
        throw dimension_error("series_derivative: variable index out of range");
    }
    formal_series out(a.n(), a.truncation());
    const std::size_t slot = conjugate ? a.n() + j : j;
    for (const auto &[k, c] : a) {
        const int e = k.exponent(slot);
        if (e == 0) {
            continue;
        }
        multi_index d = k;
        d.set_exponent(slot, e - 1);
        out.add_to(d, c * static_cast<double>(e));
    }
    return out;
}

formal_series poisson_bracket(const formal_series &f, const formal_series &g)
{
    require_same_n(f, g, "poisson_bracket");
    const std::size_t n = f.n();
    formal_series out(n, std::min(f.truncation(), g.truncation()));
    if (f.truncation_touched() || g.truncation_touched()) {
        out.mark_truncation_touched();
    }
    const complex i_unit(0.0, 1.0);
    for (const auto &[l, fl] : f) {
        for (const auto &[m, gm] : g) {
            for (std::size_t j = 0; j < n; ++j) {
                // {z^l, z^m} = i sum_j (lbar_j m_j - l_j mbar_j) z^{l+m-e_j}
                const int w = l.kbar(j) * m.k(j) - l.k(j) * m.kbar(j);
                if (w == 0) {
                    continue;
                }
                multi_index k;
                (l + m).try_subtract(multi_index::unit_pair(n, j), k);
                out.add_to(k, i_unit * static_cast<double>(w) * fl * gm);
            }
        }
    }
    return out;
}

formal_series quadratic_part(const frequency &omega, int K)
{
    formal_series h2(omega.n(), K);
    for (std::size_t j = 0; j < omega.n(); ++j) {
        h2.set(multi_index::unit_pair(omega.n(), j), omega.value(j));
    }
    return h2;
}

formal_series project_sign_class(const formal_series &h, const frequency &omega, sign_class cls)
{
    if (omega.n() != h.n()) {
        throw dimension_error("project_sign_class: frequency dimension does not match series");
    }
    const int want = cls == sign_class::minus ? -1 : (cls == sign_class::plus ? 1 : 0);
    formal_series out(h.n(), h.truncation());
    for (const auto &[k, c] : h) {
        const auto q = k.prime();
        if (sigma_omega(omega, q).sign == want) {
            out.set(k, c);
        }
    }
    return out;
}

double cauchy_coeff_bound(double c, double rho, const multi_index &k)
{
    if (!(rho > 0)) {
        throw domain_error("cauchy_coeff_bound: rho must be positive");
    }
    return c * std::pow(rho, -k.degree());
}

std::optional<multi_index> find_cauchy_violation(const formal_series &h, double c, double rho)
{
    for (const auto &[k, v] : h) {
        const double bound = cauchy_coeff_bound(c, rho, k);
        if (std::abs(v) > bound * (1 + 1e-12)) {
            return k;
        }
    }
    return std::nullopt;
}

double norm_upper_estimate(const formal_series &h, double rho)
{
    if (!(rho > 0)) {
        throw domain_error("norm_upper_estimate: rho must be positive");
    }
    double s = 0.0;
    for (const auto &[k, c] : h) {
        s += std::abs(c) * std::pow(rho, k.degree());
    }
    return s;
}

double reality_defect(const formal_series &h)
{
    double worst = 0.0;
    for (const auto &[k, c] : h) {
        worst = std::max(worst, std::abs(std::conj(c) - h.coeff(k.star())));
    }
    return worst;
}

double max_coeff_diff(const formal_series &a, const formal_series &b)
{
    require_same_n(a, b, "max_coeff_diff");
    double worst = 0.0;
    for (const auto &[k, c] : a) {
        worst = std::max(worst, std::abs(c - b.coeff(k)));
    }
    for (const auto &[k, c] : b) {
        if (a.coefficients().count(k) == 0) {
            worst = std::max(worst, std::abs(c));
        }
    }
    return worst;
}

formal_series series_from_json(const nlohmann::json &j, std::size_t n, int truncation)
{
    if (!j.is_array()) {
        throw input_error("series literal must be a JSON array");
    }
    formal_series h(n, truncation);
    try {
        for (const auto &e : j) {
            const auto k = e.at("k").get<std::vector<int>>();
            const auto kbar = e.at("kbar").get<std::vector<int>>();
            if (k.size() != n || kbar.size() != n) {
                throw dimension_error("series literal: entry has " + std::to_string(k.size()) + "/"
                                      + std::to_string(kbar.size()) + " exponents, expected "
                                      + std::to_string(n));
            }
            const double re = e.value("re", 0.0);
            const double im = e.value("im", 0.0);
            h.add_to(multi_index(k, kbar), complex(re, im));
        }
    } catch (const nlohmann::json::exception &e) {
        throw input_error(std::string("series literal: ") + e.what());
    }
    return h;
}

nlohmann::json to_json(const formal_series &h)
{
    auto arr = nlohmann::json::array();
    for (const auto &[k, c] : h) {
        arr.push_back({{"k", k.k_vector()}, {"kbar", k.kbar_vector()}, {"re", c.real()}, {"im", c.imag()}});
    }
    return arr;
}

} // namespace normflow
