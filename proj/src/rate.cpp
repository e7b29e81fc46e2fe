#include <normflow/rate.hpp>

#include <cmath>
#include <stdexcept>

#include <normflow/errors.hpp>

namespace normflow
{

double to_double(const rational &q)
{
    return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

rational parse_rational(const std::string &text)
{
    try {
        const auto slash = text.find('/');
        if (slash == std::string::npos) {
            std::size_t pos = 0;
            const auto v = std::stoll(text, &pos);
            if (pos != text.size()) {
                throw input_error("trailing characters");
            }
            return rational(v);
        }
        std::size_t p1 = 0, p2 = 0;
        const auto num = std::stoll(text.substr(0, slash), &p1);
        const auto den = std::stoll(text.substr(slash + 1), &p2);
        if (p1 != slash || p2 != text.size() - slash - 1) {
            throw input_error("trailing characters");
        }
        if (den == 0) {
            throw input_error("zero denominator");
        }
        return rational(num, den);
    } catch (const std::exception &e) {
        throw input_error("cannot parse rational '" + text + "': " + e.what());
    }
}

std::string to_string(const rational &q)
{
    if (q.denominator() == 1) {
        return std::to_string(q.numerator());
    }
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

bool rate::is_zero() const
{
    if (exact) {
        return exact->numerator() == 0;
    }
    return std::abs(value) <= float_tolerance;
}

rate operator+(const rate &a, const rate &b)
{
    rate r;
    r.value = a.value + b.value;
    if (a.exact && b.exact) {
        r.exact = *a.exact + *b.exact;
        r.value = to_double(*r.exact);
    } else {
        r.exact.reset();
    }
    return r;
}

rate operator-(const rate &a, const rate &b)
{
    rate r;
    r.value = a.value - b.value;
    if (a.exact && b.exact) {
        r.exact = *a.exact - *b.exact;
        r.value = to_double(*r.exact);
    } else {
        r.exact.reset();
    }
    return r;
}

int compare(const rate &a, const rate &b)
{
    if (a.exact && b.exact) {
        return *a.exact < *b.exact ? -1 : (*b.exact < *a.exact ? 1 : 0);
    }
    const double d = a.value - b.value;
    if (std::abs(d) <= rate::float_tolerance) {
        return 0;
    }
    return d < 0 ? -1 : 1;
}

} // namespace normflow
