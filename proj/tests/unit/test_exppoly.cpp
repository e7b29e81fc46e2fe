#include <doctest.h>

#include <cmath>

#include <normflow/errors.hpp>
#include <normflow/exppoly.hpp>

using namespace normflow;

namespace
{

rate q(std::int64_t a, std::int64_t b = 1)
{
    return rate::from_exact(rational(a, b));
}

// Composite Simpson rule, an independent check of ep_integrate.
std::complex<double> simpson(const exp_poly &a, double x, int m = 2000)
{
    const double h = x / m;
    std::complex<double> s = ep_eval(a, 0) + ep_eval(a, x);
    for (int i = 1; i < m; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * ep_eval(a, i * h);
    }
    return s * h / 3.0;
}

} // namespace

TEST_CASE("ep_mul")
{
    const exp_poly a(1, q(1), 1.0), b(1, q(2), 1.0);
    CHECK(ep_mul(a, exp_poly(1.0)) == a);
    CHECK(ep_mul(a, b) == exp_poly(2, q(3), 1.0));
    const auto onepd = ep_add(exp_poly(1.0), exp_poly(1, q(0), 1.0));
    const auto prod = ep_mul(onepd, exp_poly(0, q(1), 1.0));
    CHECK(prod == ep_add(exp_poly(0, q(1), 1.0), exp_poly(1, q(1), 1.0)));
}

TEST_CASE("ep_integrate")
{
    // int_0^d e^{-3 l} dl = (1 - e^{-3d}) / 3
    auto r = ep_integrate(exp_poly(0, q(3), 1.0));
    for (double d : {0.0, 0.5, 2.0}) {
        CHECK(std::abs(ep_eval(r, d) - (1 - std::exp(-3 * d)) / 3) < 1e-15);
    }
    // int_0^d l e^{-l} dl = 1 - (1 + d) e^{-d}
    r = ep_integrate(exp_poly(1, q(1), 1.0));
    const auto expect = ep_add(exp_poly(1.0), ep_add(exp_poly(0, q(1), -1.0), exp_poly(1, q(1), -1.0)));
    CHECK(r == expect);
    // int_0^d l^2 dl = d^3 / 3
    CHECK(ep_integrate(exp_poly(2, q(0), 1.0)) == exp_poly(3, q(0), 1.0 / 3));

    const auto mixed = ep_add(exp_poly(2, q(1, 2), {1.0, -2.0}), exp_poly(3, q(5, 3), 0.25));
    const auto integ = ep_integrate(mixed);
    for (double d : {0.3, 1.7, 4.0}) {
        CHECK(std::abs(ep_eval(integ, d) - simpson(mixed, d)) < 1e-10);
    }
    CHECK(ep_derivative(integ) == mixed);
}

TEST_CASE("ep_eval and limits")
{
    CHECK(ep_eval(exp_poly(1.0), 3.7) == std::complex<double>(1.0));
    CHECK(std::abs(ep_eval(exp_poly(1, q(1), 1.0), 1.0) - 0.36787944117144233) < 1e-15);
    const auto r = ep_integrate(exp_poly(1, q(1), 1.0));
    CHECK(std::abs(ep_eval(r, 40.0) - 1.0) < 1e-15);
    CHECK(ep_limit_infinity(exp_poly(0, q(1), 1.0)) == std::complex<double>(0.0));
    CHECK(ep_limit_infinity(ep_add(exp_poly(3.0), exp_poly(2, q(1), 1.0))) == std::complex<double>(3.0));
    CHECK_THROWS_AS(ep_limit_infinity(exp_poly(1, q(0), 1.0)), no_limit_error);
}

TEST_CASE("float rates merge only when equal within tolerance")
{
    const auto a = exp_poly(0, rate::from_double(1.0), 1.0);
    const auto b = exp_poly(0, rate::from_double(1.0 + 1e-14), 1.0);
    const auto c = exp_poly(0, rate::from_double(1.0 + 1e-6), 1.0);
    CHECK(ep_add(a, b).size() == 1);
    CHECK(ep_add(a, c).size() == 2);
}

TEST_CASE("term cap")
{
    exp_poly a;
    for (int i = 0; i < 20; ++i) {
        a = ep_add(a, exp_poly(0, q(i + 1), 1.0));
    }
    CHECK_THROWS_AS(ep_mul(a, a, 30), capacity_error);
}

TEST_CASE("exp_poly JSON round trip")
{
    const auto a = ep_add(exp_poly(2, q(1, 2), {1.0, -2.0}), exp_poly(3, q(5, 3), 0.25));
    CHECK(exp_poly_from_json(to_json(a)).size() == a.size());
    CHECK(ep_distance(exp_poly_from_json(to_json(a)), a) < 1e-15);
}

TEST_CASE("ep_magnitude")
{
    const auto p = exp_poly::from_terms({{0, rate::zero(), {3.0, 4.0}}, {1, q(1), -2.0}});
    CHECK(ep_magnitude(p, 0.0) == doctest::Approx(5.0));
    CHECK(ep_magnitude(p, 2.0) == doctest::Approx(5.0 + 4.0 * std::exp(-2.0)));
    CHECK(ep_magnitude(exp_poly{}, 1.0) == 0.0);
}
