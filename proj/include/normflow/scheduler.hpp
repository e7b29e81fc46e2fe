#ifndef NORMFLOW_SCHEDULER_HPP
#define NORMFLOW_SCHEDULER_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <normflow/flow.hpp>
#include <normflow/resonance.hpp>
#include <normflow/series.hpp>

namespace normflow
{

// a_j = n 2^{2n+j} (2^j + 2)^{2n+1} Omega_{2^j+2}, j = 0..J.
std::vector<double> make_a_sequence(const frequency &omega, std::size_t n, int J);

struct bruno_result {
    double partial_sum = 0.0;
    std::vector<double> terms;  // 2^{-j} ln a_j
    // Evidence only: the last term is zero or the last two terms shrink by a
    // factor below 0.9.
    bool evidence_yes = false;
};

bruno_result bruno_check(std::span<const double> a, int J);

// Small-divisor sequence a_j and the convex sublinear sequence b_s built
// from it. Anchors
//   b_{2^j+2} = -(1/2) sum_{i>=0} 2^{-i} ln a_{j+i},
// with a_j frozen at a_J beyond the horizon, and linear interpolation in
// between. b is stored for 3 <= s <= 2^{J+1} + 2 and is constant (-ln a_J)
// from s = 2^J + 2 on.
class sequence_pair
{
public:
    sequence_pair(std::vector<double> a, int J);

    const std::vector<double> &a() const noexcept
    {
        return m_a;
    }
    int horizon() const noexcept
    {
        return m_J;
    }
    int s_min() const noexcept
    {
        return 3;
    }
    int s_max() const noexcept
    {
        return static_cast<int>(m_b.size()) - 1;
    }
    // b_s; for s beyond s_max the frozen tail value.
    double b(int s) const;
    double anchor(int j) const;
    std::string tail_model() const
    {
        return "a_j = a_J for j > J";
    }

private:
    std::vector<double> m_a;
    int m_J;
    std::vector<double> m_b;
};

sequence_pair b_from_a(std::span<const double> a, int J);

struct convexity_report {
    std::size_t checked = 0;
    bool three_point = true;   // (l-k) b_m + (m-l) b_k + (k-m) b_l >= 0, m < k < l
    bool exchange = true;      // b_k + b_l <= b_{k-m} + b_{l+m}, 1 <= m < k <= l
    std::optional<std::string> witness;

    bool ok() const noexcept
    {
        return three_point && exchange;
    }
};

// Exhaustive check of both inequalities for all indices in [lo, hi].
convexity_report convexity_inequalities(const sequence_pair &seq, int lo, int hi, double slack = 1e-12);

struct averaging_result {
    formal_series g0;        // resonant part of the band s <= |k| <= 2s-3
    formal_series g;         // limits of the coefficients with |k| >= 2s-2
    double epsilon = 0.0;    // c Lambda Omega_{2s-2}
    double lambda = 0.0;     // (1/2) n e^{2 alpha} (2s)^{2n+1} e^{2 b_s - b_{2s-2}}
    double rho_prime = 0.0;  // e^{-alpha} (1 - epsilon/(n s))
    double band_residual = 0.0;  // max |g0_k|

    formal_series total() const
    {
        return series_add(g0, g);
    }
};

// One band-averaging step: band coefficients decay as e^{-omega_{k'} delta}
// H_k, coefficients of degree >= 2s-2 follow the nilpotent system driven by
// the band, and every coefficient is replaced by its delta -> infinity limit.
// Checks the input bound |H_k| <= c e^{b_{|k|} + alpha |k|} and the output
// bound |G_k| <= c e^{b_{|k|} + (alpha + epsilon) |k|}; throws
// bound_violation with the offending index otherwise.
averaging_result averaging_step(const formal_series &h, const frequency &omega, int s, double c, double alpha,
                                const sequence_pair &b, int K);

struct step_certificate {
    int m = 0;
    int s = 0;
    double alpha = 0.0;
    double epsilon = 0.0;
    // c0 e^{2 alpha_{m-1}} / 2^{m-1}, the value the identity a_j = e^{b - 2b}
    // gives when Omega_{2s-2} = Omega_s.
    double epsilon_closed = 0.0;
    double lambda = 0.0;
    double rho = 0.0;
    double band_residual = 0.0;
    bool rho_inequality = true;
};

struct pipeline_result {
    formal_series g;
    std::vector<step_certificate> certificates;
    double alpha0 = 0.0;
    double c0 = 0.0;
    double epsilon0 = 0.0;          // 2 c0 e^{2 alpha0}
    double epsilon0_squared = 0.0;  // 2 c0^2 e^{2 alpha0}
    double epsilon_sum = 0.0;
    double rho0 = 0.0;
    double rho_star = 0.0;
    // max |G_k| over |k| < r, and the same relative to the largest input coefficient.
    double residual_below_r = 0.0;
    double relative_residual_below_r = 0.0;
    bool epsilon_chain_ok = true;   // eps_m <= 2^{-m-2}
    bool epsilon_sum_ok = true;     // sum eps_m <= 1/2
    bool rho_star_ok = true;        // rho* >= rho0 e^{-1/2}
    bool residual_ok = true;        // relative residual < 1e-10
};

// N = max{m : 2^{m-1} + 2 < r}; zero when r <= 3.
int pipeline_steps(int r);

// Runs the averaging steps s_m = 2^{m-1} + 2, m = 1..N, from alpha0 with
// constant c0. Requires c0 e^{2 alpha0} <= 1/16 and n e^{2 alpha0} >= 2.
pipeline_result normalize_low_orders(const formal_series &h, const frequency &omega, int r, double c0, double alpha0,
                                     const sequence_pair &b, int K);

struct pipeline_constants {
    double alpha0 = 0.0;
    double c0 = 0.0;
};

// Smallest alpha0 with n e^{2 alpha0} >= 2 and |H_k| <= c0 e^{b_{|k|} + alpha0 |k|}
// for c0 = e^{-2 alpha0} / 16.
pipeline_constants choose_pipeline_constants(const formal_series &h, const sequence_pair &b);

struct split_entry {
    double delta = 0.0;
    formal_series g0;
    formal_series gstar;
    double norm_g0 = 0.0;
    double norm_gstar = 0.0;
    double ratio = 0.0;   // norm_gstar / norm(g0 + gstar)
    double bound = 0.0;   // e^{-lambda delta / p}
};

struct split_result {
    double lambda_over_p = 0.0;
    double rho = 1.0;
    std::vector<split_entry> entries;
    // Slowest H-gauge exponent among nonresonant coefficients and the largest
    // power of delta multiplying it.
    double leading_rate = 0.0;
    int leading_power = 0;
    // Decay rate of norm_gstar fitted over the entries with delta in
    // [fit_lo, fit_hi]: plain log-linear, and with the delta^leading_power
    // prefactor divided out. NaN when fewer than two usable points.
    double fit_lo = 0.0;
    double fit_hi = 0.0;
    double fitted_rate = 0.0;
    double fitted_rate_structural = 0.0;
    // max over entries of the coefficientwise distance of g0 to the g0 of the
    // last entry.
    double resonant_variation = 0.0;
};

// Resonant / nonresonant splitting of the flow at each delta, with norm
// estimates sum |H_k| rho^{|k|}. Checks omega_{k'} >= lambda/p on every
// nonresonant stored k.
split_result corank1_split(const flow_solution &sol, const corank_one_data &data, std::span<const double> deltas,
                           double rho = 1.0, double fit_lo = 1.0, double fit_hi = 6.0);

} // namespace normflow

#endif
