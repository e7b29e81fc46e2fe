#ifndef NORMFLOW_RATE_HPP
#define NORMFLOW_RATE_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <boost/rational.hpp>

namespace normflow
{

using rational = boost::rational<std::int64_t>;

double to_double(const rational &q);
rational parse_rational(const std::string &text);
std::string to_string(const rational &q);
// -1, 0 or +1. Comparisons between rational and plain int literals are avoided
// throughout: they recurse without end in some Boost releases under C++20.
inline int sign(const rational &q)
{
    return q.numerator() > 0 ? 1 : (q.numerator() < 0 ? -1 : 0);
}

// A nonnegative decay rate nu, i.e. the exponent of e^{-nu delta}.
//
// When the frequency vector is rational every rate produced by the flow is an
// exact rational as well; `exact` then carries it and all comparisons use it.
// Otherwise rates are compared with an absolute tolerance.
struct rate {
    double value = 0.0;
    std::optional<rational> exact = rational(0);

    static constexpr double float_tolerance = 1e-12;

    static rate zero()
    {
        return {};
    }
    static rate from_exact(const rational &q)
    {
        return {to_double(q), q};
    }
    static rate from_double(double v)
    {
        return {v, std::nullopt};
    }

    bool is_zero() const;

    friend rate operator+(const rate &a, const rate &b);
    friend rate operator-(const rate &a, const rate &b);

    // Three-way comparison: exact when both sides are exact, tolerant otherwise.
    friend int compare(const rate &a, const rate &b);
    friend bool same_rate(const rate &a, const rate &b)
    {
        return compare(a, b) == 0;
    }
};

} // namespace normflow

#endif
