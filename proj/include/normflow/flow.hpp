#ifndef NORMFLOW_FLOW_HPP
#define NORMFLOW_FLOW_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <normflow/exppoly.hpp>
#include <normflow/multi_index.hpp>
#include <normflow/resonance.hpp>
#include <normflow/series.hpp>

namespace normflow
{

// Memoized sigma_{k'} / omega_{k'} for every multi-index up to a degree.
// Immutable after construction, so it can be shared between threads.
class divisor_table
{
public:
    divisor_table(const frequency &omega, std::size_t n, int max_degree);

    const sign_divisor &operator()(const multi_index &k) const;
    // omega_{l'} + omega_{m'} - omega_{l'+m'}
    rate pair_rate(const multi_index &l, const multi_index &m, const multi_index &k) const;

private:
    std::unordered_map<multi_index, sign_divisor> m_table;
};

using index_set = std::unordered_set<multi_index>;

// One quadratic contribution weight * calH_l * calH_m * e^{-nu delta} to
// d/d delta calH_k, with l + m = k + e_j.
struct rhs_term {
    multi_index l;
    multi_index m;
    std::size_t j = 0;
    double weight = 0.0;
    rate nu;
    bool from_v1 = false;
};

// Enumerates the v_1 and bar-v_2 contributions to d calH_k / d delta, using
// only partners from `support`:
//   v_1:      sigma_{m'} = 0,            weight -sigma_{k'} (lbar_j m_j - l_j mbar_j), nu = 0
//   bar v_2:  sigma_{l'} < 0 < sigma_{m'}, weight 2 (lbar_j m_j - l_j mbar_j),
//             nu = omega_{l'} + omega_{m'} - omega_{k'}
// Throws if a partner of degree >= |k| would be needed (nilpotency audit).
std::vector<rhs_term> rhs_terms(const multi_index &k, const index_set &support, const divisor_table &divisors);

struct flow_options {
    std::size_t term_cap = exp_poly::default_term_cap;
    // 0: use NORMFLOW_THREADS or the hardware concurrency.
    std::size_t threads = 0;
};

// Exact solution of the continuous-averaging flow in the calH gauge,
// H_k(delta) = calH_k(delta) e^{-omega_{k'} delta}, up to degree K.
class flow_solution
{
public:
    const frequency &omega() const noexcept
    {
        return m_omega;
    }
    const formal_series &initial() const noexcept
    {
        return m_initial;
    }
    int truncation() const noexcept
    {
        return m_K;
    }
    const std::map<multi_index, exp_poly> &coefficients() const noexcept
    {
        return m_calH;
    }
    const divisor_table &divisors() const noexcept
    {
        return m_divisors;
    }

    const exp_poly &calH(const multi_index &k) const;
    std::complex<double> h_coeff(const multi_index &k, double delta) const;
    // Whole series in either gauge at a given delta.
    formal_series calH_series(double delta) const;
    formal_series h_series(double delta) const;

private:
    friend flow_solution flow_exact(const formal_series &, const frequency &, int, const flow_options &);
    flow_solution(frequency omega, formal_series initial, int K);

    frequency m_omega;
    formal_series m_initial;
    int m_K;
    divisor_table m_divisors;
    std::map<multi_index, exp_poly> m_calH;
};

flow_solution flow_exact(const formal_series &h, const frequency &omega, int K, const flow_options &opts = {});

// Classic RK4 integration of the calH-gauge coefficient ODEs, with the right
// hand side expanded directly from -{xi_* H, H} (no sign-class bookkeeping).
// Returns the calH-gauge series at every grid point. Each interval between
// grid points is split into ceil(length / step) equal steps.
std::map<double, formal_series> flow_numeric(const formal_series &h, const frequency &omega, int K,
                                             std::span<const double> delta_grid, double step);

// H_k = calH_k e^{-omega_{k'} delta}
formal_series to_h_gauge(const formal_series &calH, const frequency &omega, double delta);

struct decay_row {
    multi_index k;
    rate divisor;
    bool resonant = false;
    // Slowest exponent among the terms of H_k(delta) and the largest power of
    // delta multiplying it.
    double leading_rate = 0.0;
    int leading_power = 0;
};

struct normal_form_result {
    formal_series n_diamond;
    // Smallest degree carrying a limit coefficient above threshold; nullopt
    // stands for +infinity (zero normal form).
    std::optional<int> order;
    double threshold = 1e-10;
    std::vector<decay_row> residuals;
};

normal_form_result normal_form_limit(const flow_solution &sol, double threshold = 1e-10);

// Leading exponential behaviour of H_k(delta) read off its exp-polynomial.
decay_row leading_behaviour(const flow_solution &sol, const multi_index &k);

// Lie-series normalization: at each degree d = 3..up_to_degree the
// nonresonant monomials are removed by the generator chi with
// {H_2, chi} = -H_d^{nonres}, and H_2 + H is replaced by exp(ad_chi)(H_2 + H).
// Returns the resonant part up to up_to_degree.
formal_series birkhoff_oracle(const formal_series &h, const frequency &omega, int up_to_degree);

// A single homological step at degree d; returns the whole transformed series
// (without H_2) truncated at K.
formal_series birkhoff_step(const formal_series &h, const frequency &omega, int degree, int K);

// Largest |conj(H_k(delta)) - H_{k*}(delta)| over the samples.
double reality_defect(const flow_solution &sol, std::span<const double> delta_samples);
bool check_reality(const flow_solution &sol, std::span<const double> delta_samples, double tol = 1e-10);

std::size_t resolve_thread_count(std::size_t requested);

} // namespace normflow

#endif
