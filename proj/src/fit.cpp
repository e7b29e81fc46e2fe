#include <normflow/fit.hpp>

#include <cmath>
#include <vector>

#include <normflow/errors.hpp>

namespace normflow
{

double fit_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw domain_error("fit: need at least two points of matching length");
    }
    const double m = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) {
        throw domain_error("fit: abscissae are all equal");
    }
    return sxy / sxx;
}

namespace
{

std::vector<double> logs(std::span<const double> v)
{
    std::vector<double> out;
    out.reserve(v.size());
    for (double a : v) {
        if (!(a > 0)) {
            throw domain_error("fit: logarithm of a nonpositive value");
        }
        out.push_back(std::log(a));
    }
    return out;
}

} // namespace

double fit_decay_rate(std::span<const double> x, std::span<const double> y)
{
    return -fit_slope(x, logs(y));
}

double fit_decay_rate(std::span<const double> x, std::span<const double> y, int power)
{
    auto ly = logs(y);
    const auto lx = logs(x);
    for (std::size_t i = 0; i < ly.size(); ++i) {
        ly[i] -= power * lx[i];
    }
    return -fit_slope(x, ly);
}

double fit_power_law(std::span<const double> x, std::span<const double> y)
{
    return fit_slope(logs(x), logs(y));
}

} // namespace normflow
