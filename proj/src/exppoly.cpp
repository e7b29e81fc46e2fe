#include <normflow/exppoly.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <normflow/errors.hpp>

namespace normflow
{

namespace
{

// Neumaier summation, applied to real and imaginary parts separately.
class compensated_sum
{
public:
    void add(std::complex<double> x)
    {
        step(m_re, m_re_c, x.real());
        step(m_im, m_im_c, x.imag());
    }
    std::complex<double> value() const
    {
        return {m_re + m_re_c, m_im + m_im_c};
    }

private:
    static void step(double &sum, double &comp, double x)
    {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    double m_re = 0.0, m_re_c = 0.0, m_im = 0.0, m_im_c = 0.0;
};

} // namespace

exp_poly::exp_poly(std::complex<double> constant)
{
    if (constant != std::complex<double>{}) {
        m_terms.push_back({0, rate::zero(), constant});
    }
}

exp_poly::exp_poly(int power, rate nu, std::complex<double> c)
{
    if (power < 0) {
        throw domain_error("exp_poly: negative power");
    }
    if (c != std::complex<double>{}) {
        m_terms.push_back({power, nu, c});
    }
    canonicalize(default_term_cap);
}

exp_poly exp_poly::from_terms(std::vector<exp_term> terms, std::size_t cap)
{
    exp_poly p;
    p.m_terms = std::move(terms);
    p.canonicalize(cap);
    return p;
}

void exp_poly::canonicalize(std::size_t cap)
{
    for (const auto &t : m_terms) {
        if (compare(t.nu, rate::zero()) < 0) {
            throw domain_error("exp_poly: negative decay rate " + std::to_string(t.nu.value));
        }
        if (t.power < 0) {
            throw domain_error("exp_poly: negative power");
        }
    }
    std::stable_sort(m_terms.begin(), m_terms.end(), [](const exp_term &a, const exp_term &b) {
        const int c = compare(a.nu, b.nu);
        return c != 0 ? c < 0 : a.power < b.power;
    });
    std::vector<exp_term> merged;
    merged.reserve(m_terms.size());
    std::size_t i = 0;
    while (i < m_terms.size()) {
        exp_term head = m_terms[i];
        compensated_sum acc;
        std::size_t j = i;
        while (j < m_terms.size() && m_terms[j].power == head.power && same_rate(m_terms[j].nu, head.nu)) {
            acc.add(m_terms[j].c);
            ++j;
        }
        head.c = acc.value();
        merged.push_back(head);
        i = j;
    }
    std::erase_if(merged, [](const exp_term &t) { return t.c == std::complex<double>{}; });
    if (merged.size() > cap) {
        throw capacity_error("exp_poly: term count " + std::to_string(merged.size()) + " exceeds cap "
                             + std::to_string(cap));
    }
    m_terms = std::move(merged);
}

exp_poly exp_poly::shifted(const rate &extra) const
{
    exp_poly p;
    p.m_terms = m_terms;
    for (auto &t : p.m_terms) {
        t.nu = t.nu + extra;
    }
    p.canonicalize(std::numeric_limits<std::size_t>::max());
    return p;
}

exp_poly exp_poly::scaled(std::complex<double> s) const
{
    exp_poly p;
    p.m_terms = m_terms;
    for (auto &t : p.m_terms) {
        t.c *= s;
    }
    std::erase_if(p.m_terms, [](const exp_term &t) { return t.c == std::complex<double>{}; });
    return p;
}

bool exp_poly::has_limit() const
{
    return std::all_of(m_terms.begin(), m_terms.end(),
                       [](const exp_term &t) { return !t.nu.is_zero() || t.power == 0; });
}

bool operator==(const exp_poly &a, const exp_poly &b)
{
    if (a.m_terms.size() != b.m_terms.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.m_terms.size(); ++i) {
        const auto &x = a.m_terms[i];
        const auto &y = b.m_terms[i];
        if (x.power != y.power || !same_rate(x.nu, y.nu) || x.c != y.c) {
            return false;
        }
    }
    return true;
}

exp_poly ep_add(const exp_poly &a, const exp_poly &b, std::size_t cap)
{
    std::vector<exp_term> t = a.terms();
    t.insert(t.end(), b.terms().begin(), b.terms().end());
    return exp_poly::from_terms(std::move(t), cap);
}

exp_poly ep_mul(const exp_poly &a, const exp_poly &b, std::size_t cap)
{
    std::vector<exp_term> t;
    t.reserve(a.size() * b.size());
    for (const auto &x : a.terms()) {
        for (const auto &y : b.terms()) {
            t.push_back({x.power + y.power, x.nu + y.nu, x.c * y.c});
        }
    }
    return exp_poly::from_terms(std::move(t), cap);
}

exp_poly ep_integrate(const exp_poly &a, std::size_t cap)
{
    std::vector<exp_term> out;
    for (const auto &t : a.terms()) {
        if (t.nu.is_zero()) {
            out.push_back({t.power + 1, rate::zero(), t.c / static_cast<double>(t.power + 1)});
            continue;
        }
        // int_0^delta l^s e^{-nu l} dl
        //   = s!/nu^{s+1} - sum_{t=0}^{s} s!/(t! nu^{s+1-t}) delta^t e^{-nu delta}
        const double nu = t.nu.value;
        const int s = t.power;
        // coef_t = s!/(t! nu^{s+1-t}); coef_s = 1/nu, coef_{t-1} = coef_t * t / nu.
        std::vector<double> coef(s + 1);
        coef[s] = 1.0 / nu;
        for (int q = s; q > 0; --q) {
            coef[q - 1] = coef[q] * q / nu;
        }
        out.push_back({0, rate::zero(), t.c * coef[0]});
        for (int q = 0; q <= s; ++q) {
            out.push_back({q, t.nu, -t.c * coef[q]});
        }
    }
    return exp_poly::from_terms(std::move(out), cap);
}

exp_poly ep_derivative(const exp_poly &a)
{
    std::vector<exp_term> out;
    for (const auto &t : a.terms()) {
        if (t.power > 0) {
            out.push_back({t.power - 1, t.nu, t.c * static_cast<double>(t.power)});
        }
        if (!t.nu.is_zero()) {
            out.push_back({t.power, t.nu, -t.c * t.nu.value});
        }
    }
    return exp_poly::from_terms(std::move(out), std::numeric_limits<std::size_t>::max());
}

std::complex<double> ep_eval(const exp_poly &a, double delta)
{
    if (delta < 0) {
        throw domain_error("ep_eval: delta must be nonnegative");
    }
    // Terms are sorted by nu, so each run of equal rates shares one exponential.
    compensated_sum total;
    const auto &ts = a.terms();
    std::size_t i = 0;
    while (i < ts.size()) {
        std::size_t j = i;
        compensated_sum poly;
        while (j < ts.size() && same_rate(ts[j].nu, ts[i].nu)) {
            poly.add(ts[j].c * std::pow(delta, ts[j].power));
            ++j;
        }
        total.add(poly.value() * std::exp(-ts[i].nu.value * delta));
        i = j;
    }
    return total.value();
}

double ep_magnitude(const exp_poly &a, double delta)
{
    if (delta < 0) {
        throw domain_error("ep_magnitude: delta must be nonnegative");
    }
    double s = 0.0;
    for (const auto &t : a.terms()) {
        s += std::abs(t.c) * std::pow(delta, t.power) * std::exp(-t.nu.value * delta);
    }
    return s;
}

std::complex<double> ep_limit_infinity(const exp_poly &a)
{
    std::complex<double> lim{};
    for (const auto &t : a.terms()) {
        if (t.nu.is_zero()) {
            if (t.power > 0) {
                throw no_limit_error("ep_limit_infinity: term delta^" + std::to_string(t.power)
                                     + " without decay has no limit");
            }
            lim += t.c;
        }
    }
    return lim;
}

double ep_distance(const exp_poly &a, const exp_poly &b)
{
    const auto &x = a.terms();
    const auto &y = b.terms();
    double worst = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        if (i < x.size() && j < y.size() && x[i].power == y[j].power && same_rate(x[i].nu, y[j].nu)) {
            worst = std::max(worst, std::abs(x[i].c - y[j].c));
            ++i;
            ++j;
            continue;
        }
        // Unmatched term: decide which side is behind in canonical order.
        bool take_x;
        if (i >= x.size()) {
            take_x = false;
        } else if (j >= y.size()) {
            take_x = true;
        } else {
            const int c = compare(x[i].nu, y[j].nu);
            take_x = c != 0 ? c < 0 : x[i].power < y[j].power;
        }
        if (take_x) {
            worst = std::max(worst, std::abs(x[i++].c));
        } else {
            worst = std::max(worst, std::abs(y[j++].c));
        }
    }
    return worst;
}

nlohmann::json to_json(const exp_poly &a)
{
    auto arr = nlohmann::json::array();
    for (const auto &t : a.terms()) {
        arr.push_back({t.power, t.nu.value, t.c.real(), t.c.imag()});
    }
    return arr;
}

exp_poly exp_poly_from_json(const nlohmann::json &j)
{
    std::vector<exp_term> terms;
    try {
        for (const auto &q : j) {
            if (!q.is_array() || q.size() != 4) {
                throw input_error("exp_poly JSON: each term must be [s, nu, re, im]");
            }
            terms.push_back({q[0].get<int>(), rate::from_double(q[1].get<double>()),
                             {q[2].get<double>(), q[3].get<double>()}});
        }
    } catch (const nlohmann::json::exception &e) {
        throw input_error(std::string("exp_poly JSON: ") + e.what());
    }
    return exp_poly::from_terms(std::move(terms));
}

} // namespace normflow
