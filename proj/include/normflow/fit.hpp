#ifndef NORMFLOW_FIT_HPP
#define NORMFLOW_FIT_HPP

#include <span>

namespace normflow
{

// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

// Decay rate r of y ~ C e^{-r x}: minus the slope of ln y against x.
double fit_decay_rate(std::span<const double> x, std::span<const double> y);

// Decay rate r of y ~ C x^s e^{-r x} with the power s given: minus the slope
// of ln y - s ln x against x.
double fit_decay_rate(std::span<const double> x, std::span<const double> y, int power);

// Exponent p of y ~ C x^p: slope of ln y against ln x.
double fit_power_law(std::span<const double> x, std::span<const double> y);

} // namespace normflow

#endif
