#ifndef NORMFLOW_SERIES_HPP
#define NORMFLOW_SERIES_HPP

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include <normflow/multi_index.hpp>
#include <normflow/resonance.hpp>

namespace normflow
{

using complex = std::complex<double>;

// Sparse formal power series sum_k H_k z^k zbar^kbar, truncated at total
// degree K.
//
// Coefficients are stored in a std::map keyed by multi_index, so iteration
// (and therefore every summation performed by the operations below) follows a
// fixed lexicographic order. Exact zeros are never stored. Writing a monomial
// of degree > K drops it and sets truncation_touched().
class formal_series
{
public:
    using map_type = std::map<multi_index, complex>;

    formal_series(std::size_t n, int truncation);

    std::size_t n() const noexcept
    {
        return m_n;
    }
    int truncation() const noexcept
    {
        return m_K;
    }
    bool truncation_touched() const noexcept
    {
        return m_touched;
    }
    void mark_truncation_touched() noexcept
    {
        m_touched = true;
    }

    const map_type &coefficients() const noexcept
    {
        return m_coeffs;
    }
    std::size_t size() const noexcept
    {
        return m_coeffs.size();
    }
    bool empty() const noexcept
    {
        return m_coeffs.empty();
    }
    auto begin() const
    {
        return m_coeffs.begin();
    }
    auto end() const
    {
        return m_coeffs.end();
    }

    complex coeff(const multi_index &k) const;
    void set(const multi_index &k, complex c);
    void add_to(const multi_index &k, complex c);

    // Smallest degree with a stored coefficient, or nullopt for the zero series.
    std::optional<int> min_degree() const;
    std::optional<int> max_degree() const;

    // Membership in F_diamond: every stored monomial has degree >= 3.
    bool in_f_diamond() const;

    // Part with degree in [lo, hi].
    formal_series degree_range(int lo, int hi) const;
    // Copy with a new (smaller) truncation.
    formal_series truncated(int K) const;

    // Coefficients with |H_k| <= eps removed. Reporting helper only; never used
    // inside arithmetic.
    formal_series pruned(double eps) const;

    complex evaluate(std::span<const complex> z, std::span<const complex> zbar) const;

    friend bool operator==(const formal_series &, const formal_series &) = default;

private:
    void check_index(const multi_index &k) const;

    std::size_t m_n;
    int m_K;
    map_type m_coeffs;
    bool m_touched = false;
};

formal_series series_add(const formal_series &a, const formal_series &b);
formal_series series_sub(const formal_series &a, const formal_series &b);
formal_series series_scale(const formal_series &a, complex s);
formal_series series_mul(const formal_series &a, const formal_series &b);

// d/dz_j (conjugate = false) or d/dzbar_j (conjugate = true).
formal_series series_derivative(const formal_series &a, std::size_t j, bool conjugate);

// {F,G} = i sum_j (d_{zbar_j} F d_{z_j} G - d_{z_j} F d_{zbar_j} G).
formal_series poisson_bracket(const formal_series &f, const formal_series &g);

// H_2 = sum_j omega_j z_j zbar_j, truncated at K.
formal_series quadratic_part(const frequency &omega, int K);

enum class sign_class { minus, zero, plus };

// H^-, H^0 or H^+ according to the sign of <omega, k'>.
formal_series project_sign_class(const formal_series &h, const frequency &omega, sign_class cls);

// Cauchy estimate: |H_k| <= c rho^{-|k|} whenever sup_{D_rho} |H| <= c.
double cauchy_coeff_bound(double c, double rho, const multi_index &k);

// First stored k with |H_k| > c rho^{-|k|} (1e-12 relative slack), if any.
std::optional<multi_index> find_cauchy_violation(const formal_series &h, double c, double rho);

// sum_k |H_k| rho^{|k|}: an upper estimate of sup_{D_rho} |H|, not the exact sup.
double norm_upper_estimate(const formal_series &h, double rho);

// max_k |conj(H_k) - H_{k*}|; zero iff H belongs to F_r.
double reality_defect(const formal_series &h);

// Max coefficientwise modulus of a - b.
double max_coeff_diff(const formal_series &a, const formal_series &b);

// Series literal: [{"k":[...],"kbar":[...],"re":x,"im":y}, ...]. The number
// of degrees of freedom is taken from `n` (must match every entry).
formal_series series_from_json(const nlohmann::json &j, std::size_t n, int truncation);
nlohmann::json to_json(const formal_series &h);

} // namespace normflow

#endif
