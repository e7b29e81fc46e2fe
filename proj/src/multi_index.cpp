#include <normflow/multi_index.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <normflow/errors.hpp>

namespace normflow
{

multi_index::multi_index(std::size_t n) : m_n(static_cast<std::uint8_t>(n))
{
    if (n == 0 || n > max_dof) {
        throw dimension_error("multi_index: number of degrees of freedom must be in [1, "
                              + std::to_string(max_dof) + "], got " + std::to_string(n));
    }
}

multi_index::multi_index(std::span<const int> k, std::span<const int> kbar) : multi_index(k.size())
{
    if (k.size() != kbar.size()) {
        throw dimension_error("multi_index: k and kbar have different lengths");
    }
    for (std::size_t j = 0; j < k.size(); ++j) {
        set_exponent(j, k[j]);
        set_exponent(m_n + j, kbar[j]);
    }
}

multi_index multi_index::unit_pair(std::size_t n, std::size_t j)
{
    multi_index e(n);
    e.m_e[j] = 1;
    e.m_e[n + j] = 1;
    return e;
}

void multi_index::set_exponent(std::size_t i, int value)
{
    if (value < 0 || value > max_exponent) {
        throw domain_error("multi_index: exponent " + std::to_string(value) + " out of range");
    }
    m_e[i] = static_cast<std::uint8_t>(value);
}

int multi_index::degree() const noexcept
{
    int d = 0;
    for (std::size_t i = 0; i < 2u * m_n; ++i) {
        d += m_e[i];
    }
    return d;
}

std::vector<int> multi_index::prime() const
{
    std::vector<int> q(m_n);
    for (std::size_t j = 0; j < m_n; ++j) {
        q[j] = kbar(j) - k(j);
    }
    return q;
}

multi_index multi_index::star() const
{
    multi_index s(*this);
    for (std::size_t j = 0; j < m_n; ++j) {
        std::swap(s.m_e[j], s.m_e[m_n + j]);
    }
    return s;
}

bool multi_index::is_self_conjugate() const noexcept
{
    for (std::size_t j = 0; j < m_n; ++j) {
        if (m_e[j] != m_e[m_n + j]) {
            return false;
        }
    }
    return true;
}

std::vector<int> multi_index::k_vector() const
{
    return {m_e.begin(), m_e.begin() + m_n};
}

std::vector<int> multi_index::kbar_vector() const
{
    return {m_e.begin() + m_n, m_e.begin() + 2 * m_n};
}

multi_index multi_index::operator+(const multi_index &other) const
{
    if (other.m_n != m_n) {
        throw dimension_error("multi_index: dimension mismatch in sum");
    }
    multi_index r(*this);
    for (std::size_t i = 0; i < 2u * m_n; ++i) {
        r.set_exponent(i, m_e[i] + other.m_e[i]);
    }
    return r;
}

bool multi_index::try_subtract(const multi_index &other, multi_index &out) const
{
    out = *this;
    for (std::size_t i = 0; i < 2u * m_n; ++i) {
        if (m_e[i] < other.m_e[i]) {
            return false;
        }
        out.m_e[i] = static_cast<std::uint8_t>(m_e[i] - other.m_e[i]);
    }
    return true;
}

std::string multi_index::to_string() const
{
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < m_n; ++j) {
        os << (j ? "," : "") << k(j);
    }
    os << '|';
    for (std::size_t j = 0; j < m_n; ++j) {
        os << (j ? "," : "") << kbar(j);
    }
    os << ')';
    return os.str();
}

std::strong_ordering operator<=>(const multi_index &a, const multi_index &b)
{
    if (auto c = a.m_n <=> b.m_n; c != 0) {
        return c;
    }
    for (std::size_t i = 0; i < 2u * a.m_n; ++i) {
        if (auto c = a.m_e[i] <=> b.m_e[i]; c != 0) {
            return c;
        }
    }
    return std::strong_ordering::equal;
}

std::size_t multi_index::hash() const noexcept
{
    // FNV-1a over the used exponents.
    std::size_t h = 1469598103934665603ull ^ m_n;
    for (std::size_t i = 0; i < 2u * m_n; ++i) {
        h ^= m_e[i];
        h *= 1099511628211ull;
    }
    return h;
}

namespace
{

void compose(std::size_t slot, int remaining, multi_index &cur, std::vector<multi_index> &out)
{
    const std::size_t vars = 2 * cur.n();
    if (slot + 1 == vars) {
        cur.set_exponent(slot, remaining);
        out.push_back(cur);
        return;
    }
    // Descending first exponent gives lexicographically decreasing output; we
    // sort at the end anyway.
    for (int e = 0; e <= remaining; ++e) {
        cur.set_exponent(slot, e);
        compose(slot + 1, remaining - e, cur, out);
    }
    cur.set_exponent(slot, 0);
}

} // namespace

std::vector<multi_index> indices_of_degree(std::size_t n, int degree)
{
    std::vector<multi_index> out;
    if (degree < 0) {
        return out;
    }
    multi_index cur(n);
    compose(0, degree, cur, out);
    std::sort(out.begin(), out.end());
    return out;
}

double multinomial(const multi_index &k)
{
    double lg = std::lgamma(k.degree() + 1.0);
    for (std::size_t i = 0; i < 2 * k.n(); ++i) {
        lg -= std::lgamma(k.exponent(i) + 1.0);
    }
    return std::round(std::exp(lg));
}

} // namespace normflow
