#include <doctest.h>

#include <cmath>
#include <numbers>

#include <normflow/errors.hpp>
#include <normflow/resonance.hpp>

using namespace normflow;

namespace
{

const double phi = std::numbers::phi;

frequency omega_2m1()
{
    return frequency::exact({rational(2), rational(-1)});
}

frequency golden()
{
    return frequency::floating({1.0, phi});
}

std::vector<int> v(std::initializer_list<int> x)
{
    return x;
}

} // namespace

TEST_CASE("sigma_omega")
{
    const auto om = omega_2m1();
    auto sd = sigma_omega(om, v({1, 2}));
    CHECK(sd.sign == 0);
    CHECK(sd.divisor.is_zero());
    sd = sigma_omega(om, v({1, 0}));
    CHECK(sd.sign == 1);
    CHECK(sd.divisor.value == 2.0);
    sd = sigma_omega(om, v({0, 3}));
    CHECK(sd.sign == -1);
    CHECK(sd.divisor.value == 3.0);

    sd = sigma_omega(golden(), v({2, -1}));
    CHECK(sd.sign == 1);
    CHECK(sd.divisor.value == doctest::Approx(2 - phi).epsilon(1e-12));
}

TEST_CASE("float mode flags near-resonances outside the declared lattice")
{
    const auto om = frequency::floating({1.0, 1.0 + 1e-12}, {}, 1e-9);
    CHECK_THROWS_AS(sigma_omega(om, v({1, -1})), ambiguity_error);
    CHECK_THROWS_AS(om.audit(2), ambiguity_error);
    const auto declared = frequency::floating({1.0, 1.0 + 1e-12}, {{1, -1}}, 1e-9);
    CHECK(sigma_omega(declared, v({2, -2})).sign == 0);
    CHECK_NOTHROW(declared.audit(4));
    CHECK_THROWS_AS(frequency::floating({1.0, 2.0}, {{1, -1}}, 1e-9), input_error);
}

TEST_CASE("omega_capital")
{
    for (int s = 1; s <= 6; ++s) {
        CHECK(omega_capital(omega_2m1(), s) == doctest::Approx(1.0));
    }
    CHECK(omega_capital(frequency::exact({rational(1), rational(1)}), 1) == doctest::Approx(1.0));
    // Brute force: the smallest |q1 + q2 phi| over 0 < |q|_1 <= 3 is 2 - phi.
    double best = 0;
    for (int a = -3; a <= 3; ++a) {
        for (int b = -3; b <= 3; ++b) {
            if (std::abs(a) + std::abs(b) <= 3 && (a != 0 || b != 0)) {
                best = std::max(best, 1.0 / std::abs(a + b * phi));
            }
        }
    }
    CHECK(omega_capital(golden(), 3) == doctest::Approx(best).epsilon(1e-12));
    CHECK(omega_capital(golden(), 3) == doctest::Approx(2.618034).epsilon(1e-6));
}

TEST_CASE("corank1_decompose")
{
    auto d = corank1_decompose(omega_2m1());
    CHECK(d.q == v({2, -1}));
    CHECK(d.p == 1);
    CHECK(d.lambda == 1.0);

    d = corank1_decompose(frequency::exact({rational(1, 2), rational(1, 3)}));
    CHECK(d.q == v({3, 2}));
    CHECK(d.p == 6);
    CHECK(d.lambda == 1.0);
    CHECK(d.min_divisor() == doctest::Approx(1.0 / 6));

    d = corank1_decompose(frequency::exact({rational(1), rational(1)}));
    CHECK(d.q == v({1, 1}));
    CHECK(d.p == 1);
    CHECK(d.lambda == 1.0);

    CHECK_THROWS_AS(corank1_decompose(golden()), domain_error);
}

TEST_CASE("lattice_rank")
{
    CHECK(lattice_rank(golden(), 6) == 0);
    CHECK(lattice_rank(omega_2m1(), 4) == 1);
    CHECK(lattice_rank(frequency::exact({rational(1), rational(1), rational(1)}), 4) == 2);
    CHECK(lattice_rank(frequency::floating({1.0, 1.0, phi}, {{1, -1, 0}}), 3) == 1);
}

TEST_CASE("frequency JSON")
{
    const auto j = nlohmann::json::parse(R"({"mode":"rational","values":["1/2","1/3"]})");
    const auto om = frequency_from_json(j);
    CHECK(om.mode() == frequency_mode::rational);
    CHECK(frequency_from_json(to_json(om)).exact_values() == om.exact_values());
    CHECK_THROWS_AS(frequency_from_json(nlohmann::json::parse(R"({"mode":"p-adic","values":[1]})")), input_error);
}
