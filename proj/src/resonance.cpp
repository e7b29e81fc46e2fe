#include <normflow/resonance.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <normflow/errors.hpp>

#include "lattice.hpp"

namespace normflow
{

namespace
{

std::string vec_to_string(std::span<const int> q)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < q.size(); ++i) {
        os << (i ? "," : "") << q[i];
    }
    os << ']';
    return os.str();
}

} // namespace

frequency frequency::exact(std::vector<rational> values)
{
    if (values.empty()) {
        throw input_error("frequency: empty value list");
    }
    frequency f;
    f.m_mode = frequency_mode::rational;
    f.m_values.reserve(values.size());
    for (const auto &q : values) {
        f.m_values.push_back(to_double(q));
    }
    f.m_exact = std::move(values);
    return f;
}

frequency frequency::floating(std::vector<double> values, std::vector<std::vector<int>> lattice, double tol)
{
    if (values.empty()) {
        throw input_error("frequency: empty value list");
    }
    if (!(tol > 0)) {
        throw input_error("frequency: tolerance must be positive");
    }
    for (const auto &g : lattice) {
        if (g.size() != values.size()) {
            throw dimension_error("frequency: lattice generator has wrong dimension");
        }
    }
    if (lattice::rank(lattice::from_int_rows(lattice)) != static_cast<int>(lattice.size())) {
        throw input_error("frequency: declared lattice generators are linearly dependent");
    }
    frequency f;
    f.m_mode = frequency_mode::floating;
    f.m_values = std::move(values);
    f.m_lattice = std::move(lattice);
    f.m_tol = tol;
    for (const auto &g : f.m_lattice) {
        if (std::abs(f.dot(g)) > tol) {
            throw input_error("frequency: declared generator " + vec_to_string(g)
                              + " is not resonant within tolerance");
        }
    }
    return f;
}

double frequency::dot(std::span<const int> q) const
{
    if (q.size() != n()) {
        throw dimension_error("frequency: vector dimension mismatch");
    }
    if (m_mode == frequency_mode::rational) {
        return to_double(*exact_dot(q));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        s += m_values[j] * q[j];
    }
    return s;
}

std::optional<rational> frequency::exact_dot(std::span<const int> q) const
{
    if (m_mode != frequency_mode::rational) {
        return std::nullopt;
    }
    if (q.size() != n()) {
        throw dimension_error("frequency: vector dimension mismatch");
    }
    rational s(0);
    for (std::size_t j = 0; j < q.size(); ++j) {
        if (q[j] != 0) {
            s += m_exact[j] * static_cast<std::int64_t>(q[j]);
        }
    }
    return s;
}

bool frequency::in_declared_lattice(std::span<const int> q) const
{
    bool zero = true;
    for (int v : q) {
        zero = zero && v == 0;
    }
    if (zero) {
        return true;
    }
    if (m_lattice.empty()) {
        return false;
    }
    const auto x = lattice::solve_in_span(lattice::from_int_rows(m_lattice), q);
    if (!x) {
        return false;
    }
    for (const auto &c : *x) {
        if (c.denominator() != 1) {
            return false;
        }
    }
    return true;
}

void frequency::audit(int q_max) const
{
    if (m_mode == frequency_mode::rational) {
        return;
    }
    for_each_in_l1_ball(n(), q_max, [&](std::span<const int> q) {
        if (std::abs(dot(q)) <= m_tol && !in_declared_lattice(q)) {
            throw ambiguity_error("frequency audit: q = " + vec_to_string(q)
                                  + " is resonant within tolerance but outside the declared lattice");
        }
    });
}

std::int64_t frequency::common_denominator() const
{
    std::int64_t l = 1;
    for (const auto &q : m_exact) {
        l = std::lcm(l, q.denominator());
    }
    return l;
}

sign_divisor sigma_omega(const frequency &omega, std::span<const int> q)
{
    if (omega.mode() == frequency_mode::rational) {
        const rational d = *omega.exact_dot(q);
        const int s = sign(d);
        return {s, rate::from_exact(s < 0 ? -d : d)};
    }
    const double d = omega.dot(q);
    if (!omega.declared_lattice().empty() && omega.in_declared_lattice(q)) {
        return {0, rate::zero()};
    }
    if (std::abs(d) <= omega.tolerance()) {
        bool zero = true;
        for (int v : q) {
            zero = zero && v == 0;
        }
        if (zero) {
            return {0, rate::zero()};
        }
        throw ambiguity_error("sigma_omega: |<omega,q>| = " + std::to_string(std::abs(d)) + " for q = "
                              + vec_to_string(q) + " is below tolerance but q is not in the declared lattice");
    }
    return {d > 0 ? 1 : -1, rate::from_double(std::abs(d))};
}

double omega_capital(const frequency &omega, int s)
{
    if (s < 1) {
        throw domain_error("omega_capital: s must be >= 1");
    }
    std::optional<rate> smallest;
    for_each_in_l1_ball(omega.n(), s, [&](std::span<const int> q) {
        const auto sd = sigma_omega(omega, q);
        if (sd.sign == 0) {
            return;
        }
        if (!smallest || compare(sd.divisor, *smallest) < 0) {
            smallest = sd.divisor;
        }
    });
    if (!smallest) {
        throw domain_error("omega_capital: every q with |q| <= " + std::to_string(s) + " is resonant");
    }
    if (smallest->exact) {
        return to_double(rational(1) / *smallest->exact);
    }
    return 1.0 / smallest->value;
}

int lattice_rank(const frequency &omega, int search_bound)
{
    if (search_bound < 1) {
        throw domain_error("lattice_rank: search bound must be >= 1");
    }
    if (omega.mode() == frequency_mode::rational) {
        for (const auto &v : omega.exact_values()) {
            if (v.numerator() != 0) {
                return static_cast<int>(omega.n()) - 1;
            }
        }
        return static_cast<int>(omega.n());
    }
    omega.audit(search_bound);
    return lattice::rank(lattice::from_int_rows(omega.declared_lattice()));
}

corank_one_data corank1_decompose(const frequency &omega)
{
    const auto n = static_cast<int>(omega.n());
    corank_one_data out;
    if (omega.mode() == frequency_mode::rational) {
        if (lattice_rank(omega, 1) != n - 1) {
            throw domain_error("corank1_decompose: resonance lattice does not have rank n-1");
        }
        const std::int64_t den = omega.common_denominator();
        std::vector<std::int64_t> u;
        for (const auto &v : omega.exact_values()) {
            u.push_back((v * den).numerator());
        }
        const std::int64_t g = lattice::gcd_all(u);
        for (auto x : u) {
            out.q.push_back(static_cast<int>(x / g));
        }
        // omega = (g/den) q and gcd(q) = 1, so gcd(q, p) = 1 for p = denominator(g/den).
        const rational c(g, den);
        out.p = c.denominator();
        out.lambda = static_cast<double>(c.numerator());
        return out;
    }
    const auto &gens = omega.declared_lattice();
    if (static_cast<int>(gens.size()) != n - 1) {
        throw domain_error("corank1_decompose: declared lattice does not have rank n-1");
    }
    const auto kernel = lattice::integer_kernel(lattice::from_int_rows(gens), omega.n());
    if (kernel.size() != 1) {
        throw domain_error("corank1_decompose: declared lattice does not have rank n-1");
    }
    std::vector<int> q(kernel.front().begin(), kernel.front().end());
    double dq = omega.dot(q);
    if (dq < 0) {
        for (auto &x : q) {
            x = -x;
        }
        dq = -dq;
    }
    double qq = 0;
    for (int x : q) {
        qq += static_cast<double>(x) * x;
    }
    const double mu = dq / qq;
    for (std::size_t j = 0; j < omega.n(); ++j) {
        if (std::abs(omega.value(j) - mu * q[j]) > omega.tolerance()) {
            throw domain_error("corank1_decompose: omega is not proportional to the lattice normal within tolerance");
        }
    }
    out.q = std::move(q);
    out.p = 1;
    out.lambda = mu;
    return out;
}

frequency frequency_from_json(const nlohmann::json &j)
{
    try {
        const auto mode = j.at("mode").get<std::string>();
        const auto &vals = j.at("values");
        if (mode == "rational") {
            std::vector<rational> v;
            for (const auto &x : vals) {
                if (x.is_string()) {
                    v.push_back(parse_rational(x.get<std::string>()));
                } else if (x.is_number_integer()) {
                    v.emplace_back(x.get<std::int64_t>());
                } else {
                    throw input_error("rational frequency values must be strings like \"1/2\" or integers");
                }
            }
            return frequency::exact(std::move(v));
        }
        if (mode == "float") {
            std::vector<double> v = vals.get<std::vector<double>>();
            std::vector<std::vector<int>> lat;
            if (j.contains("lattice")) {
                lat = j.at("lattice").get<std::vector<std::vector<int>>>();
            }
            const double tol = j.value("tol", 1e-9);
            return frequency::floating(std::move(v), std::move(lat), tol);
        }
        throw input_error("frequency mode must be \"rational\" or \"float\", got \"" + mode + "\"");
    } catch (const nlohmann::json::exception &e) {
        throw input_error(std::string("frequency JSON: ") + e.what());
    }
}

nlohmann::json to_json(const frequency &omega)
{
    nlohmann::json j;
    if (omega.mode() == frequency_mode::rational) {
        j["mode"] = "rational";
        auto arr = nlohmann::json::array();
        for (const auto &q : omega.exact_values()) {
            arr.push_back(to_string(q));
        }
        j["values"] = arr;
    } else {
        j["mode"] = "float";
        j["values"] = omega.values();
        j["lattice"] = omega.declared_lattice();
        j["tol"] = omega.tolerance();
    }
    return j;
}

} // namespace normflow
