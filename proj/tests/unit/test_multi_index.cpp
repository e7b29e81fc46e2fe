#include <doctest.h>

#include <normflow/multi_index.hpp>

using normflow::multi_index;

TEST_CASE("prime and star")
{
    const std::vector<int> k{2, 0}, kb{1, 3};
    const multi_index m(k, kb);
    CHECK(m.degree() == 6);
    CHECK(m.prime() == std::vector<int>{-1, 3});
    CHECK(m.star().star() == m);
    CHECK(m.star().k_vector() == kb);
    CHECK_FALSE(m.is_self_conjugate());
    const std::vector<int> s{1, 1};
    CHECK(multi_index(s, s).is_self_conjugate());
}

TEST_CASE("indices of degree")
{
    // C(d + 2n - 1, 2n - 1)
    CHECK(normflow::indices_of_degree(1, 3).size() == 4);
    CHECK(normflow::indices_of_degree(2, 3).size() == 20);
    CHECK(normflow::indices_of_degree(3, 4).size() == 126);
    const auto v = normflow::indices_of_degree(2, 4);
    CHECK(std::is_sorted(v.begin(), v.end()));
}

TEST_CASE("multinomial")
{
    const std::vector<int> k{2, 1}, kb{0, 1};
    CHECK(normflow::multinomial(multi_index(k, kb)) == doctest::Approx(12.0));
}

TEST_CASE("subtract")
{
    const std::vector<int> a{1, 0}, b{0, 0};
    multi_index out;
    CHECK_FALSE(multi_index(b, b).try_subtract(multi_index(a, b), out));
    CHECK(multi_index(a, a).try_subtract(multi_index(a, b), out));
    CHECK(out == multi_index(b, a));
}
