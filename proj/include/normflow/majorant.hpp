#ifndef NORMFLOW_MAJORANT_HPP
#define NORMFLOW_MAJORANT_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <normflow/flow.hpp>
#include <normflow/multi_index.hpp>
#include <normflow/series.hpp>

namespace normflow
{

// One-variable majorant in zeta = sum_j (z_j + zbar_j), nonnegative
// coefficients. Either the closed form a zeta^s / (b - zeta) or an explicit
// coefficient list.
class majorant_fn
{
public:
    enum class kind { rational_form, series };

    static majorant_fn rational_form(double a, double b, int s);
    static majorant_fn series(std::vector<double> coeffs);

    kind form() const noexcept
    {
        return m_kind;
    }
    double a() const noexcept
    {
        return m_a;
    }
    double b() const noexcept
    {
        return m_b;
    }
    int s() const noexcept
    {
        return m_s;
    }

    // Coefficient of zeta^j: a b^{s-1-j} for j >= s in the rational form.
    double coeff(int j) const;
    std::vector<double> expand(int K) const;
    // b for the rational form, +infinity for a finite series.
    double radius() const;

    majorant_fn scaled(double factor) const;

private:
    majorant_fn() = default;

    kind m_kind = kind::series;
    double m_a = 0.0;
    double m_b = 1.0;
    int m_s = 0;
    std::vector<double> m_coeffs;
};

// |F_k| <= coefficient of zeta^{|k|} for every stored k.
bool dominates(const formal_series &f, const majorant_fn &m);

// a rho zeta^s / (rho - zeta), after checking |F_k| <= a rho^{s - |k|}.
// Throws bound_violation naming the first offending k.
majorant_fn geometric_majorant(const formal_series &f, double a, double rho, int s);

// 2 rho zeta^2 / (rho/2 - zeta), a majorant of d/dzeta (rho zeta^3 / (rho - zeta)).
majorant_fn derivative_majorant(double rho);

// Expands both sides to degree K; returns the first degree where the
// derivative of rho zeta^3/(rho - zeta) exceeds derivative_majorant(rho).
std::optional<int> derivative_majorant_violation(double rho, int K);

// Radius b / (1 + 2 a tau + 2 sqrt(a tau (1 + a tau))) of the disk where the
// Burgers solution below is analytic.
double burgers_radius(double a, double b, double tau);

// Solution G(zeta) of G = a (zeta + tau G)^2 / (b - zeta - tau G) with
// G(0) = 0:
//   G = 2 a zeta^2 / (D (1 + sqrt(1 - w))),  D = b - (1 + 2 a tau) zeta,
//   w = 4 a tau (1 + a tau) zeta^2 / D^2,
// using the principal square root. Throws domain_error outside the disk.
std::complex<double> burgers_solve(double a, double b, double tau, std::complex<double> zeta);

// Taylor coefficients of the same G up to degree K, by repeated substitution
// into the fixed-point equation.
std::vector<double> burgers_series(double a, double b, double tau, int K);

struct analyticity_result {
    double radius = 0.0;
    double bound = 0.0;
    // Burgers parameters a = 2 h rho, b = rho / 2, tau = 8 n delta.
    double a = 0.0;
    double b = 0.0;
    double tau = 0.0;
};

// Analyticity radius rho / (4 (1 + 32 n h rho delta)) and bound
// h rho^3 / (4 (1 + 32 n h rho delta)^3) of the flow at time delta when the
// initial data has sup-norm h rho^3 on the rho-ball. Cross-checks both values
// against the Burgers form and throws bound_violation on disagreement.
analyticity_result analyticity_bounds(double h, double rho, int n, double delta);

struct polydisk_sample_report {
    double radius = 0.0;
    double bound = 0.0;
    double worst_value = 0.0;   // largest |truncated series| seen
    double worst_tail = 0.0;    // tail allowance at that point
    double worst_excess = 0.0;  // max(|value| - bound - tail), <= 0 when fine
    std::size_t samples = 0;
    bool ok = true;
};

// Samples the truncated calH series at time delta on the l1-ball
// sum_j (|z_j| + |zbar_j|) <= fraction * radius, for fractions
// {0.5, 0.9, 0.99} and 64 points each (fixed seed). The tail beyond degree K
// is estimated geometrically from the ratio of the last two degree sums.
polydisk_sample_report sample_flow_on_polydisk(const flow_solution &sol, double delta, double radius, double bound,
                                               std::uint64_t seed = 20240611);

// Solves x = y + phi(y) for y = x + psi(x) on |x| <= rho.
class near_identity_inverse
{
public:
    using function = std::function<std::complex<double>(std::complex<double>)>;

    near_identity_inverse(function phi, double rho, double sup_phi);

    // psi(x) by the fixed-point iteration psi <- -phi(x + psi).
    std::complex<double> operator()(std::complex<double> x) const;
    double rho() const noexcept
    {
        return m_rho;
    }
    // Sampled sup |phi| on |y| <= 6 rho.
    double sup_phi() const noexcept
    {
        return m_sup;
    }

private:
    function m_phi;
    double m_rho;
    double m_sup;
};

// Checks |phi| <= rho/2 on |y| <= 6 rho by sampling (centre plus 64 points on
// circles of radius {0.25, 0.5, 0.75, 0.9, 1} x 6 rho); throws bound_violation
// otherwise.
near_identity_inverse invert_near_identity(near_identity_inverse::function phi, double rho);

struct degenerate_result {
    double rho_dom = 0.0;
    double g_bound = 0.0;
    // a tau (6 rho)^{r-1} / (b - 6 rho) and its relaxation 2 a tau (6 rho)^{r-1} / b.
    double phi_bound = 0.0;
    double phi_bound_relaxed = 0.0;
    // True when rho_dom = b/12 is the active branch of the minimum.
    bool small_tau_branch = false;
};

// rho = min{ b/12, (1/6) (b / (24 a tau))^{1/(r-2)} }, G bound rho / (2 tau),
// with the chain phi_bound <= phi_bound_relaxed <= rho/2 checked.
degenerate_result degenerate_bounds(double a, double b, int r, double tau);

// Coefficients F_j(delta) of the solution of the one-variable majorant system
// d/d delta F = 4 n (dF/dzeta)^2, F(zeta, 0) = f(zeta), f = O(zeta^3).
// Each F_j is a polynomial in delta.
class zeta_flow
{
public:
    zeta_flow(const majorant_fn &initial, std::size_t n, int K);

    std::size_t n() const noexcept
    {
        return m_n;
    }
    int truncation() const noexcept
    {
        return m_K;
    }
    double coeff(int j, double delta) const;
    // F_j(delta) times the multinomial share of k (j = |k|).
    double majorant_coeff(const multi_index &k, double delta) const;
    const std::vector<double> &poly(int j) const
    {
        return m_poly.at(j);
    }

private:
    std::size_t m_n;
    int m_K;
    std::vector<std::vector<double>> m_poly;
};

struct domination_row {
    multi_index k;
    double delta = 0.0;
    double exact = 0.0;
    double majorant = 0.0;
    double margin = 0.0;
    // Floating-point allowance on `exact`: 4 (terms + 2) eps ep_magnitude.
    double rounding = 0.0;
};

struct domination_report {
    std::vector<domination_row> rows;
    std::size_t violations = 0;
    std::optional<domination_row> witness;
    bool initial_dominated = true;

    bool ok() const noexcept
    {
        return violations == 0;
    }
};

using majorant_solution = std::function<double(const multi_index &, double)>;

// |calH_k(delta)| <= majorant(k, delta) for every stored k and delta in the
// grid, up to the rounding allowance of the exp-polynomial (a coefficient
// that is exactly zero in exact arithmetic evaluates to ~1e-16). The initial
// data is compared without allowance. Rows are ordered by delta, then k.
domination_report verify_domination(const flow_solution &exact, const majorant_solution &majorant,
                                    std::span<const double> delta_grid);
domination_report verify_domination(const flow_solution &exact, const zeta_flow &majorant,
                                    std::span<const double> delta_grid);

// sup_{0 <= q <= q_max} c_F e^{-b_q - (alpha + ln rho) q}.
double sublinear_constant(double c_f, double rho, double alpha, const std::function<double(int)> &b, int q_max);

// First stored k with |F_k| > c e^{b_{|k|} + alpha |k|} (relative slack 1e-12).
std::optional<multi_index> find_sublinear_violation(const formal_series &f, double c, double alpha,
                                                    const std::function<double(int)> &b);

} // namespace normflow

#endif
