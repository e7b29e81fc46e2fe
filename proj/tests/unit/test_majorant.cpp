#include <doctest.h>

#include <cmath>
#include <random>

#include <normflow/errors.hpp>
#include <normflow/fit.hpp>
#include <normflow/majorant.hpp>

#include "test_util.hpp"

using namespace normflow;
using test_util::idx;

namespace
{

formal_series z1_cubed(double c = 1.0)
{
    formal_series f(1, 8);
    f.set(idx({3}, {0}), c);
    return f;
}

} // namespace

TEST_CASE("dominates")
{
    const auto m = majorant_fn::rational_form(1.0, 1.0, 3);
    CHECK(dominates(formal_series(2, 8), m));
    CHECK(dominates(z1_cubed(), m));
    CHECK_FALSE(dominates(z1_cubed(2.0), majorant_fn::series({0, 0, 0, 1})));
}

TEST_CASE("geometric_majorant")
{
    const auto g = geometric_majorant(z1_cubed(), 1.0, 1.0, 3);
    CHECK(g.coeff(3) == 1.0);
    CHECK(g.coeff(7) == 1.0);
    CHECK(dominates(z1_cubed(), g));
    CHECK_NOTHROW(geometric_majorant(formal_series(1, 8), 0.1, 0.5, 3));
    CHECK_THROWS_AS(geometric_majorant(z1_cubed(2.0), 1.0, 1.0, 3), bound_violation);

    // sup |z^3| = rho^3 on D_rho, so a = c rho^{-s} satisfies the hypothesis.
    const double rho = 0.6, c = std::pow(rho, 3);
    CHECK_NOTHROW(geometric_majorant(z1_cubed(), c * std::pow(rho, -3), rho, 3));
}

TEST_CASE("derivative_majorant")
{
    const auto d = derivative_majorant(1.0);
    // Left side: d/dzeta zeta^3 / (1 - zeta) has coefficient j + 1 at zeta^j, j >= 2.
    CHECK(d.coeff(0) == 0.0);
    CHECK(d.coeff(1) == 0.0);
    CHECK(d.coeff(2) == doctest::Approx(4.0));
    CHECK(d.coeff(5) == doctest::Approx(32.0));
    CHECK(d.coeff(5) >= 6.0);
    CHECK_FALSE(derivative_majorant_violation(1.0, 30));
    CHECK_FALSE(derivative_majorant_violation(0.3, 30));
}

TEST_CASE("Burgers solution")
{
    CHECK(std::abs(burgers_solve(2.0, 1.5, 0.0, 0.4) - 2.0 * 0.16 / 1.1) < 1e-15);

    const double a = 1, b = 1, tau = 0.3;
    const std::complex<double> z = 0.1;
    const auto g = burgers_solve(a, b, tau, z);
    CHECK(std::abs(g - a * (z + tau * g) * (z + tau * g) / (b - z - tau * g)) < 1e-12);

    // Taylor coefficients against a Cauchy integral of the closed form.
    const auto ser = burgers_series(a, b, tau, 10);
    const double r = 0.5 * burgers_radius(a, b, tau);
    for (int j = 0; j <= 10; ++j) {
        std::complex<double> s{};
        const int m = 256;
        for (int p = 0; p < m; ++p) {
            const auto w = std::polar(r, 2 * std::numbers::pi * p / m);
            s += burgers_solve(a, b, tau, w) * std::pow(w, -j);
        }
        CHECK(std::abs(s / static_cast<double>(m) - ser[j]) < 1e-10 * std::max(1.0, std::abs(ser[j])));
    }

    // |G| <= a b / (1 + 2 a tau)^2 on |zeta| <= b / (2 (1 + 2 a tau)).
    for (double t : {0.0, 0.5, 3.0}) {
        const double q = 1 + 2 * a * t;
        for (int p = 0; p < 32; ++p) {
            const auto w = std::polar(b / (2 * q), 2 * std::numbers::pi * p / 32);
            CHECK(std::abs(burgers_solve(a, b, t, w)) <= a * b / (q * q) * (1 + 1e-12));
        }
    }
    CHECK_THROWS_AS(burgers_solve(a, b, tau, 2.0), domain_error);
}

TEST_CASE("analyticity_bounds")
{
    const auto t0 = analyticity_bounds(0.5, 0.8, 2, 0.0);
    CHECK(t0.radius == doctest::Approx(0.2));
    CHECK(t0.bound == doctest::Approx(0.5 * 0.512 / 4));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, 3.0);
    for (int i = 0; i < 20; ++i) {
        const double h = u(rng), rho = u(rng), delta = u(rng);
        const int n = 1 + i % 3;
        const auto t = analyticity_bounds(h, rho, n, delta);
        const double q = 1 + 2 * t.a * t.tau;
        CHECK(std::abs(t.a * t.b * t.b / (2 * q * q * q) - t.bound) <= 1e-14 * t.bound);
    }

    // radius ~ C / delta for large delta.
    std::vector<double> ds, rs;
    for (double d = 1e3; d <= 1e5; d *= 2) {
        ds.push_back(d);
        rs.push_back(analyticity_bounds(1.0, 1.0, 2, d).radius);
    }
    CHECK(fit_power_law(ds, rs) == doctest::Approx(-1.0).epsilon(0.01));
}

TEST_CASE("invert_near_identity")
{
    const auto zero = invert_near_identity([](std::complex<double>) { return std::complex<double>{}; }, 0.5);
    CHECK(zero(0.3) == std::complex<double>{});

    const double e = 0.01;
    const auto inv = invert_near_identity([e](std::complex<double> y) { return e * y * y; }, 0.5);
    for (double x : {0.05, 0.1, 0.2}) {
        const auto psi = inv(x);
        // Lagrange inversion: psi = -e x^2 + 2 e^2 x^3 + O(x^4)
        CHECK(std::abs(psi - (-e * x * x + 2 * e * e * x * x * x)) < 10 * e * e * e * std::pow(x, 4));
        const auto y = x + psi;
        CHECK(std::abs(x - (y + e * y * y)) < 1e-12);
    }
    CHECK_THROWS_AS(invert_near_identity([](std::complex<double> y) { return y; }, 0.5), bound_violation);
}

TEST_CASE("degenerate_bounds")
{
    const double a = 1, b = 1;
    CHECK(degenerate_bounds(a, b, 4, 1e-6).small_tau_branch);
    for (int r : {3, 4, 5}) {
        std::vector<double> ts, rad, gb;
        for (double t = 10; t <= 1e4; t *= 1.5) {
            const auto d = degenerate_bounds(a, b, r, t);
            ts.push_back(t);
            rad.push_back(d.rho_dom);
            gb.push_back(d.g_bound);
        }
        CHECK(std::abs(fit_power_law(ts, rad) + 1.0 / (r - 2)) < 0.05);
        CHECK(std::abs(fit_power_law(ts, gb) + 1.0 + 1.0 / (r - 2)) < 0.05);
    }
}

TEST_CASE("zeta_flow solves the majorant system")
{
    const auto init = majorant_fn::rational_form(1.0, 2.0, 3);
    const zeta_flow f(init, 2, 8);
    for (int j = 0; j <= 8; ++j) {
        CHECK(f.coeff(j, 0.0) == doctest::Approx(init.coeff(j)));
    }
    // d/d delta F_j = 4 n sum_{p + q = j + 2} p q F_p F_q, checked by central differences.
    const double d = 0.3, h = 1e-5;
    for (int j = 3; j <= 8; ++j) {
        double rhs = 0;
        for (int p = 3; p <= j - 1; ++p) {
            rhs += 8.0 * p * (j + 2 - p) * f.coeff(p, d) * f.coeff(j + 2 - p, d);
        }
        const double lhs = (f.coeff(j, d + h) - f.coeff(j, d - h)) / (2 * h);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
    CHECK_THROWS_AS(zeta_flow(majorant_fn::series({0, 0, 1}), 1, 6), domain_error);
}

TEST_CASE("verify_domination")
{
    formal_series h(1, 6);
    h.set(idx({3}, {0}), 1.0);
    h.set(idx({0}, {3}), 1.0);
    const auto sol = flow_exact(h, frequency::exact({rational(1)}), 6);
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
    // zeta^3 has coefficient 1 on z^3 and zbar^3, so f = zeta^3 majorizes h.
    const zeta_flow maj(majorant_fn::series({0, 0, 0, 1}), 1, 6);
    const auto rep = verify_domination(sol, maj, grid);
    CHECK(rep.ok());
    CHECK(rep.initial_dominated);

    const zeta_flow half(majorant_fn::series({0, 0, 0, 0.5}), 1, 6);
    const auto bad = verify_domination(sol, half, grid);
    CHECK_FALSE(bad.ok());
    REQUIRE(bad.witness);
    CHECK(bad.witness->exact > bad.witness->majorant);

    const auto zero = flow_exact(formal_series(1, 6), frequency::exact({rational(1)}), 6);
    CHECK(verify_domination(zero, half, grid).ok());
}

TEST_CASE("sublinear bounds")
{
    const auto b = [](int) { return -1.0; };
    formal_series f(1, 6);
    f.set(idx({3}, {0}), 0.3);
    CHECK_FALSE(find_sublinear_violation(f, 1.0, 0.0, b));
    CHECK(find_sublinear_violation(f, 1.0, -1.0, b));
    // sup_q c e^{1 - (alpha + ln rho) q} with alpha + ln rho > 0 peaks at q = 0.
    CHECK(sublinear_constant(1.0, 1.0, 0.5, b, 10) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("polydisk sampling stays under a generous bound")
{
    formal_series h(1, 6);
    h.set(idx({3}, {0}), 1.0);
    h.set(idx({0}, {3}), 1.0);
    const auto sol = flow_exact(h, frequency::exact({rational(1)}), 6);
    const auto rep = sample_flow_on_polydisk(sol, 0.5, 0.2, 1.0);
    CHECK(rep.ok);
    CHECK(rep.samples == 192);
    const auto tight = sample_flow_on_polydisk(sol, 0.5, 0.2, 1e-9);
    CHECK_FALSE(tight.ok);
}
