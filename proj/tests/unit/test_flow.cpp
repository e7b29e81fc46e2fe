#include <doctest.h>

#include <cmath>
#include <random>

#include <normflow/errors.hpp>
#include <normflow/fit.hpp>
#include <normflow/flow.hpp>

#include "test_util.hpp"

using namespace normflow;
using test_util::idx;

namespace
{

frequency unit1()
{
    return frequency::exact({rational(1)});
}

frequency one_one()
{
    return frequency::exact({rational(1), rational(1)});
}

formal_series cubic_pair(int K)
{
    formal_series h(1, K);
    h.set(idx({3}, {0}), 1.0);
    h.set(idx({0}, {3}), 1.0);
    return h;
}

// d calH_k / d delta at delta = 0 straight from -{xi H, H2 + H}:
// xi H = -i sum sigma_k H_k z^k, and the calH gauge adds omega_{k'} H_k.
formal_series bracket_oracle(const formal_series &h, const frequency &om)
{
    formal_series xi(h.n(), h.truncation());
    for (const auto &[k, c] : h) {
        xi.set(k, complex(0, -1) * static_cast<double>(sigma_omega(om, k.prime()).sign) * c);
    }
    auto out = series_scale(poisson_bracket(xi, series_add(quadratic_part(om, h.truncation()), h)), -1.0);
    for (const auto &[k, c] : h) {
        out.add_to(k, sigma_omega(om, k.prime()).divisor.value * c);
    }
    return out;
}

formal_series rhs_at_zero(const formal_series &h, const frequency &om)
{
    const divisor_table table(om, h.n(), h.truncation());
    index_set support;
    for (const auto &[k, c] : h) {
        support.insert(k);
    }
    formal_series out(h.n(), h.truncation());
    for (int d = 3; d <= h.truncation(); ++d) {
        for (const auto &k : indices_of_degree(h.n(), d)) {
            complex s{};
            for (const auto &t : rhs_terms(k, support, table)) {
                s += t.weight * h.coeff(t.l) * h.coeff(t.m);
            }
            out.set(k, s);
        }
    }
    return out;
}

} // namespace

TEST_CASE("rhs_terms: structural cases")
{
    const auto om = one_one();
    const divisor_table table(om, 2, 6);
    std::mt19937_64 rng(5);
    const auto h = test_util::random_series(rng, 2, 6, 3, 5, 30);
    index_set support;
    for (const auto &[k, c] : h) {
        support.insert(k);
    }
    for (const auto &k : indices_of_degree(2, 3)) {
        CHECK(rhs_terms(k, support, table).empty());
    }
    for (const auto &k : indices_of_degree(2, 6)) {
        if (table(k).sign == 0) {
            for (const auto &t : rhs_terms(k, support, table)) {
                CHECK_FALSE(t.from_v1);
            }
        }
    }
}

TEST_CASE("rhs_terms agree with the bracket expansion")
{
    std::mt19937_64 rng(99);
    const auto h1 = test_util::random_series(rng, 1, 6, 3, 4, 8);
    CHECK(max_coeff_diff(rhs_at_zero(h1, unit1()), bracket_oracle(h1, unit1())) < 1e-12);
    const auto h2 = test_util::random_series(rng, 2, 7, 3, 5, 25);
    CHECK(max_coeff_diff(rhs_at_zero(h2, one_one()), bracket_oracle(h2, one_one())) < 1e-12);
    const auto om = frequency::exact({rational(1), rational(2)});
    CHECK(max_coeff_diff(rhs_at_zero(h2, om), bracket_oracle(h2, om)) < 1e-12);
}

TEST_CASE("flow_exact matches the RK4 oracle (n = 1, K = 4)")
{
    const auto h = cubic_pair(4);
    const auto sol = flow_exact(h, unit1(), 4);
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 5.0};
    const auto num = flow_numeric(h, unit1(), 4, grid, 1e-3);
    CHECK(max_coeff_diff(num.at(0.0), h) == 0.0);
    for (double d : grid) {
        CHECK(max_coeff_diff(sol.calH_series(d), num.at(d)) < 1e-8);
    }
}

TEST_CASE("RK4 oracle converges with order four")
{
    const auto h = cubic_pair(6);
    const auto sol = flow_exact(h, unit1(), 6);
    const std::vector<double> grid{2.0};
    std::vector<double> steps, errs;
    for (double st : {0.1, 0.05, 0.025}) {
        steps.push_back(st);
        errs.push_back(max_coeff_diff(flow_numeric(h, unit1(), 6, grid, st).at(2.0), sol.calH_series(2.0)));
    }
    CHECK(fit_power_law(steps, errs) >= 3.8);
}

TEST_CASE("degree-3 coefficients are constant in the calH gauge")
{
    std::mt19937_64 rng(17);
    const auto h = test_util::random_series(rng, 2, 6, 3, 5, 20);
    const auto sol = flow_exact(h, one_one(), 6);
    for (const auto &[k, p] : sol.coefficients()) {
        if (k.degree() == 3) {
            CHECK(p == exp_poly(h.coeff(k)));
        }
    }
}

TEST_CASE("resonant input is a fixed point")
{
    formal_series h(2, 6);
    h.set(idx({1, 1}, {1, 1}), 0.5);
    h.set(idx({2, 0}, {0, 2}), {1.0, 2.0});
    h.set(idx({0, 2}, {2, 0}), {1.0, -2.0});
    h.set(idx({2, 1}, {1, 2}), 3.0);
    const auto sol = flow_exact(h, one_one(), 6);
    for (double d : {0.0, 1.0, 10.0}) {
        CHECK(max_coeff_diff(sol.h_series(d), h) < 1e-15);
    }
}

TEST_CASE("without quadratic terms coefficients decay linearly")
{
    std::mt19937_64 rng(23);
    const auto h = test_util::random_series(rng, 2, 3, 3, 3, 10);
    const auto om = frequency::exact({rational(1), rational(3)});
    const auto sol = flow_exact(h, om, 3);
    for (const auto &[k, c] : h) {
        const double w = sigma_omega(om, k.prime()).divisor.value;
        for (double d : {0.5, 2.0}) {
            CHECK(std::abs(sol.h_coeff(k, d) - std::exp(-w * d) * c) < 1e-15);
        }
    }
}

TEST_CASE("normal_form_limit")
{
    const auto empty = normal_form_limit(flow_exact(formal_series(2, 6), one_one(), 6));
    CHECK(empty.n_diamond.empty());
    CHECK_FALSE(empty.order);

    formal_series h(1, 6);
    h.set(idx({2}, {2}), 1.0);
    const auto nf = normal_form_limit(flow_exact(h, unit1(), 6));
    CHECK(nf.order == 4);
    CHECK(max_coeff_diff(nf.n_diamond, h) < 1e-15);

    // Generic cubic with unit coefficients, golden-mean frequency.
    const auto om = frequency::floating({1.0, std::numbers::phi});
    formal_series g(2, 4);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ph(0.0, 6.283185307179586);
    for (const auto &k : indices_of_degree(2, 3)) {
        if (k < k.star()) {
            const auto c = std::polar(1.0, ph(rng));
            g.set(k, c);
            g.set(k.star(), std::conj(c));
        }
    }
    const auto lim = normal_form_limit(flow_exact(g, om, 4));
    const auto bnf = birkhoff_oracle(g, om, 4);
    CHECK(max_coeff_diff(lim.n_diamond.degree_range(4, 4), bnf.degree_range(4, 4)) < 1e-9);
}

TEST_CASE("birkhoff_oracle")
{
    formal_series res(2, 6);
    res.set(idx({1, 1}, {1, 1}), 2.0);
    res.set(idx({2, 0}, {0, 2}), 1.0);
    CHECK(max_coeff_diff(birkhoff_oracle(res, one_one(), 6), res) < 1e-15);

    formal_series z3(1, 4);
    z3.set(idx({3}, {0}), 1.0);
    CHECK(birkhoff_oracle(z3, unit1(), 3).degree_range(3, 3).empty());

    // N_4(eps) = eps L + eps^2 Q for eps-scaled input.
    std::mt19937_64 rng(8);
    const auto om = frequency::exact({rational(1), rational(3)});
    const auto h = test_util::random_real_series(rng, 2, 4, 3, 4, 12);
    auto n4 = [&](double e) { return birkhoff_oracle(series_scale(h, e), om, 4).degree_range(4, 4); };
    const auto a = n4(1.0), b = n4(0.5), c = n4(0.25);
    // From a = L + Q and b = L/2 + Q/4: Q = 2a - 4b, L = 4b - a; predict c = L/4 + Q/16.
    const auto Q = series_sub(series_scale(a, 2.0), series_scale(b, 4.0));
    const auto L = series_sub(series_scale(b, 4.0), a);
    CHECK(max_coeff_diff(series_add(series_scale(L, 0.25), series_scale(Q, 1.0 / 16)), c) < 1e-12);
}

TEST_CASE("one averaging flow step equals one Birkhoff step at degree 4")
{
    formal_series z3(1, 4);
    z3.set(idx({3}, {0}), 1.0);
    const auto lim = flow_exact(z3, unit1(), 4);
    const auto step = birkhoff_step(z3, unit1(), 3, 4);
    CHECK(step.degree_range(3, 3).empty());
    for (const auto &k : indices_of_degree(1, 4)) {
        CHECK(std::abs(ep_limit_infinity(lim.calH(k)) - step.coeff(k)) < 1e-12);
    }
}

TEST_CASE("check_reality")
{
    std::mt19937_64 rng(2);
    const std::vector<double> samples{0.0, 1.0, 5.0};
    const auto h = test_util::random_real_series(rng, 2, 6, 3, 5, 15);
    CHECK(check_reality(flow_exact(h, one_one(), 6), samples));

    formal_series realc(1, 5);
    realc.set(idx({2}, {1}), 0.7);
    realc.set(idx({1}, {2}), 0.7);
    realc.set(idx({3}, {0}), -0.2);
    realc.set(idx({0}, {3}), -0.2);
    CHECK(check_reality(flow_exact(realc, unit1(), 5), samples));

    formal_series bad(1, 5);
    bad.set(idx({2}, {1}), {0.0, 1.0});
    CHECK_FALSE(check_reality(flow_exact(bad, unit1(), 5), samples));
}

TEST_CASE("thread count does not change the result")
{
    std::mt19937_64 rng(77);
    const auto h = test_util::random_real_series(rng, 2, 7, 3, 4, 12);
    const auto a = flow_exact(h, one_one(), 7, {exp_poly::default_term_cap, 1});
    const auto b = flow_exact(h, one_one(), 7, {exp_poly::default_term_cap, 3});
    REQUIRE(a.coefficients().size() == b.coefficients().size());
    for (const auto &[k, p] : a.coefficients()) {
        CHECK(p == b.calH(k));
    }
}
