#ifndef NORMFLOW_EXPPOLY_HPP
#define NORMFLOW_EXPPOLY_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include <json.hpp>

#include <normflow/rate.hpp>

namespace normflow
{

// One term c * delta^s * e^{-nu delta}.
struct exp_term {
    int power = 0;
    rate nu;
    std::complex<double> c;
};

// Finite sum of exp_terms, kept canonical: sorted by (nu, power), one term per
// (nu, power) pair, no zero coefficients, all nu >= 0.
//
// Two rates are merged only when they compare equal (exactly in rational
// mode, within 1e-12 in float mode); nearby but distinct rates stay separate.
class exp_poly
{
public:
    static constexpr std::size_t default_term_cap = 10000;

    exp_poly() = default;
    explicit exp_poly(std::complex<double> constant);
    exp_poly(int power, rate nu, std::complex<double> c);

    static exp_poly from_terms(std::vector<exp_term> terms, std::size_t cap = default_term_cap);

    const std::vector<exp_term> &terms() const noexcept
    {
        return m_terms;
    }
    bool is_zero() const noexcept
    {
        return m_terms.empty();
    }
    std::size_t size() const noexcept
    {
        return m_terms.size();
    }

    // Multiply by e^{-extra delta}.
    exp_poly shifted(const rate &extra) const;
    exp_poly scaled(std::complex<double> s) const;

    // True iff every term has nu > 0 or is the constant (nu = 0, power = 0).
    bool has_limit() const;

    friend bool operator==(const exp_poly &a, const exp_poly &b);

private:
    void canonicalize(std::size_t cap);

    std::vector<exp_term> m_terms;
};

exp_poly ep_add(const exp_poly &a, const exp_poly &b, std::size_t cap = exp_poly::default_term_cap);
exp_poly ep_mul(const exp_poly &a, const exp_poly &b, std::size_t cap = exp_poly::default_term_cap);

// int_0^delta A(lambda) d lambda as an exp_poly in delta.
exp_poly ep_integrate(const exp_poly &a, std::size_t cap = exp_poly::default_term_cap);

// d/d delta, exact.
exp_poly ep_derivative(const exp_poly &a);

std::complex<double> ep_eval(const exp_poly &a, double delta);

// sum |c| delta^s e^{-nu delta} over the terms; scales the rounding error of
// ep_eval, including the rounding carried by the coefficients themselves.
double ep_magnitude(const exp_poly &a, double delta);

// Constant part; throws no_limit_error if a nu = 0, power > 0 term is present.
std::complex<double> ep_limit_infinity(const exp_poly &a);

// Largest coefficient modulus difference between matched terms; infinity if
// the (nu, power) supports differ.
double ep_distance(const exp_poly &a, const exp_poly &b);

// Debug serialization: [[s, nu, re, im], ...].
nlohmann::json to_json(const exp_poly &a);
exp_poly exp_poly_from_json(const nlohmann::json &j);

} // namespace normflow

#endif
