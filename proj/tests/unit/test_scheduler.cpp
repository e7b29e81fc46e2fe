#include <doctest.h>

#include <cmath>
#include <random>

#include <normflow/errors.hpp>
#include <normflow/scheduler.hpp>

#include "test_util.hpp"

using namespace normflow;
using test_util::idx;

namespace
{

const double e1 = std::exp(1.0);

frequency unit1()
{
    return frequency::exact({rational(1)});
}

} // namespace

TEST_CASE("make_a_sequence")
{
    const auto om = frequency::exact({rational(2), rational(-1)});
    const auto a = make_a_sequence(om, 2, 4);
    CHECK(a[0] == doctest::Approx(2.0 * 16 * 243));
    for (int j = 0; j + 1 < 5; ++j) {
        const double r = (std::pow(2.0, j + 1) + 2) / (std::pow(2.0, j) + 2);
        CHECK(a[j + 1] / a[j] == doctest::Approx(2 * std::pow(r, 5)));
    }
    // Omega bounded: 2^{-j} ln a_j shrinks geometrically.
    const auto bc = bruno_check(a, 4);
    CHECK(bc.evidence_yes);
}

TEST_CASE("bruno_check")
{
    std::vector<double> ones(8, 1.0);
    auto r = bruno_check(ones, 7);
    CHECK(r.partial_sum == 0.0);
    CHECK(r.evidence_yes);

    std::vector<double> es(30, e1);
    r = bruno_check(es, 29);
    CHECK(r.partial_sum == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(r.evidence_yes);

    std::vector<double> fast;
    for (int j = 0; j < 8; ++j) {
        fast.push_back(std::exp(std::pow(2.0, j)));
    }
    r = bruno_check(fast, 7);
    CHECK(r.partial_sum == doctest::Approx(8.0));
    CHECK_FALSE(r.evidence_yes);

    CHECK_THROWS_AS(bruno_check(std::vector<double>{0.5, 1.0}, 1), input_error);
    CHECK_THROWS_AS(bruno_check(std::vector<double>{2.0, 1.5}, 1), input_error);
}

TEST_CASE("b_from_a")
{
    std::vector<double> es(6, e1);
    const auto seq = b_from_a(es, 5);
    for (int j = 0; j <= 6; ++j) {
        CHECK(std::abs(seq.anchor(j) + 1.0) < 1e-12);
    }
    for (int s = 3; s <= seq.s_max() + 5; ++s) {
        CHECK(std::abs(seq.b(s) + 1.0) < 1e-12);
    }

    std::vector<double> ones(4, 1.0);
    const auto zero = b_from_a(ones, 3);
    for (int s = 3; s <= zero.s_max(); ++s) {
        CHECK(zero.b(s) == 0.0);
    }

    // Growing a: identity a_j = exp(A_{j+1} - 2 A_j), monotonicity, sign and
    // the anchor convexity combination.
    std::vector<double> a;
    for (int j = 0; j <= 5; ++j) {
        a.push_back(std::exp(1.0 + 0.7 * j + 0.1 * j * j));
    }
    const auto s2 = b_from_a(a, 5);
    for (int j = 0; j <= 5; ++j) {
        CHECK(std::abs(s2.anchor(j + 1) - 2 * s2.anchor(j) - std::log(a[j])) < 1e-12);
    }
    for (int s = 3; s < s2.s_max(); ++s) {
        CHECK(s2.b(s + 1) <= s2.b(s) + 1e-15);
        CHECK(s2.b(s) < 0);
    }
    for (int J = 1; J <= 5; ++J) {
        const double p = std::pow(2.0, J), h = std::pow(2.0, J - 1);
        const double lhs = p * s2.anchor(J - 1) - (p + h) * s2.anchor(J) + h * s2.anchor(J + 1);
        CHECK(std::abs(lhs - h * (std::log(a[J]) - std::log(a[J - 1]))) < 1e-12 * (1 + std::abs(lhs)));
    }
}

TEST_CASE("convexity_inequalities")
{
    std::vector<double> es(6, e1);
    const auto flat = convexity_inequalities(b_from_a(es, 5), 3, 34);
    CHECK(flat.ok());
    CHECK(flat.checked > 0);

    std::vector<double> a;
    for (int j = 0; j <= 5; ++j) {
        a.push_back(std::exp(static_cast<double>(j)));
    }
    const auto seq = b_from_a(a, 5);
    const auto rep = convexity_inequalities(seq, 3, 34);
    CHECK(rep.ok());
    CHECK_FALSE(rep.witness);
    CHECK_THROWS_AS(convexity_inequalities(seq, 2, 10), domain_error);
}

TEST_CASE("averaging_step: resonant band is left alone")
{
    std::vector<double> es(4, e1);
    const auto seq = b_from_a(es, 3);
    // z^2 zbar^2 is resonant for omega = 1; at s = 4 the band is [4, 5].
    formal_series band(1, 6);
    band.set(idx({2}, {2}), 0.1);
    const auto r = averaging_step(band, unit1(), 4, 1.0, 0.0, seq, 6);
    CHECK(max_coeff_diff(r.g0, band) == 0.0);
    CHECK(r.g.empty());
    CHECK(r.band_residual == doctest::Approx(0.1));
}

TEST_CASE("averaging_step: one cubic step matches the Birkhoff step")
{
    std::vector<double> es(4, e1);
    const auto seq = b_from_a(es, 3);
    formal_series h(1, 4);
    h.set(idx({3}, {0}), 0.01);
    const auto r = averaging_step(h, unit1(), 3, 1.0 / 32, 0.0, seq, 4);
    CHECK(r.g0.empty());
    const auto step = birkhoff_step(h, unit1(), 3, 4);
    CHECK(max_coeff_diff(r.g, step.degree_range(4, 4)) < 1e-9);

    // Lambda = (1/2) n e^{2 alpha} (2s)^{2n+1} e^{2 b_3 - b_4} = 108 / e; Omega_4 = 1.
    CHECK(r.lambda == doctest::Approx(108.0 / e1));
    CHECK(r.epsilon == doctest::Approx(108.0 / (32 * e1)));
    CHECK(r.rho_prime == doctest::Approx(1 - r.epsilon / 3));
}

TEST_CASE("averaging_step rejects inputs above the coefficient bound")
{
    std::vector<double> es(4, e1);
    const auto seq = b_from_a(es, 3);
    formal_series h(1, 4);
    h.set(idx({3}, {0}), 1.0);
    try {
        averaging_step(h, unit1(), 3, 1.0 / 32, 0.0, seq, 4);
        FAIL("expected a bound violation");
    } catch (const bound_violation &e) {
        CHECK(e.module() == "scheduler");
        CHECK(e.witness().find("(3|0)") != std::string::npos);
    }
}

TEST_CASE("normalize_low_orders")
{
    const auto om = unit1();
    const auto a = make_a_sequence(om, 1, 4);
    const auto seq = b_from_a(a, 4);

    formal_series h(1, 6);
    h.set(idx({3}, {0}), 1.0);
    h.set(idx({0}, {3}), 1.0);

    CHECK(pipeline_steps(3) == 0);
    CHECK(pipeline_steps(4) == 1);
    CHECK(pipeline_steps(6) == 2);

    const auto pc = choose_pipeline_constants(h, seq);
    CHECK(pc.c0 * std::exp(2 * pc.alpha0) == doctest::Approx(1.0 / 16));

    const auto none = normalize_low_orders(h, om, 3, pc.c0, pc.alpha0, seq, 6);
    CHECK(none.certificates.empty());
    CHECK(none.g == h);

    const auto res = normalize_low_orders(h, om, 4, pc.c0, pc.alpha0, seq, 6);
    REQUIRE(res.certificates.size() == 1);
    const auto &c = res.certificates[0];
    CHECK(c.s == 3);
    CHECK(c.epsilon <= 0.125);
    CHECK(c.epsilon == doctest::Approx(c.epsilon_closed));
    CHECK(c.rho_inequality);
    CHECK(res.epsilon_chain_ok);
    CHECK(res.epsilon_sum_ok);
    CHECK(res.rho_star_ok);
    CHECK(res.residual_ok);
    CHECK(res.epsilon0 == doctest::Approx(0.125));
    CHECK(res.epsilon0_squared == doctest::Approx(0.125 * pc.c0));
    CHECK(res.g.min_degree() == 4);

    const auto nf = normal_form_limit(flow_exact(h, om, 6));
    CHECK(max_coeff_diff(project_sign_class(res.g.degree_range(4, 4), om, sign_class::zero),
                         nf.n_diamond.degree_range(4, 4))
          < 1e-8);

    CHECK_THROWS_AS(normalize_low_orders(h, om, 4, 1.0, pc.alpha0, seq, 6), domain_error);
}

TEST_CASE("corank1_split")
{
    const auto om = frequency::exact({rational(1), rational(1)});
    const auto data = corank1_decompose(om);
    std::mt19937_64 rng(4);
    const auto h = test_util::random_real_series(rng, 2, 6, 3, 3, 10);
    const auto sol = flow_exact(h, om, 6);
    const std::vector<double> ds{0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const auto sp = corank1_split(sol, data, ds);
    CHECK(sp.lambda_over_p == 1.0);
    const auto &e0 = sp.entries.front();
    CHECK(max_coeff_diff(series_add(e0.g0, e0.gstar), h) < 1e-12);
    CHECK(max_coeff_diff(e0.g0, project_sign_class(h, om, sign_class::zero)) < 1e-12);
    for (const auto &e : sp.entries) {
        CHECK(max_coeff_diff(series_add(e.g0, e.gstar), sol.h_series(e.delta)) < 1e-12);
        CHECK(e.bound == doctest::Approx(std::exp(-e.delta)));
    }
    CHECK(sp.leading_rate >= 1.0);

    formal_series res(2, 6);
    res.set(idx({1, 1}, {1, 1}), 1.0);
    res.set(idx({2, 0}, {0, 2}), 0.5);
    res.set(idx({0, 2}, {2, 0}), 0.5);
    const auto sr = corank1_split(flow_exact(res, om, 6), data, ds);
    for (const auto &e : sr.entries) {
        CHECK(e.gstar.empty());
    }
    CHECK(sr.resonant_variation == 0.0);
}
