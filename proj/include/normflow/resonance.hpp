#ifndef NORMFLOW_RESONANCE_HPP
#define NORMFLOW_RESONANCE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include <normflow/rate.hpp>

namespace normflow
{

enum class frequency_mode { rational, floating };

// Frequency vector omega of the quadratic part H_2 = sum omega_j z_j zbar_j.
//
// Rational mode decides resonances exactly. Float mode cannot, so the caller
// declares generators of the resonance lattice; an integer vector q is then
// resonant iff it lies in their integer span, and a vector with
// |<omega,q>| <= tol outside that span is reported as ambiguous.
class frequency
{
public:
    static frequency exact(std::vector<rational> values);
    static frequency floating(std::vector<double> values, std::vector<std::vector<int>> lattice = {},
                              double tol = 1e-9);

    std::size_t n() const noexcept
    {
        return m_values.size();
    }
    frequency_mode mode() const noexcept
    {
        return m_mode;
    }
    double value(std::size_t j) const
    {
        return m_values[j];
    }
    const std::vector<double> &values() const noexcept
    {
        return m_values;
    }
    const std::vector<rational> &exact_values() const noexcept
    {
        return m_exact;
    }
    const std::vector<std::vector<int>> &declared_lattice() const noexcept
    {
        return m_lattice;
    }
    double tolerance() const noexcept
    {
        return m_tol;
    }

    double dot(std::span<const int> q) const;
    std::optional<rational> exact_dot(std::span<const int> q) const;

    // Integer-span membership for the declared lattice (float mode only).
    bool in_declared_lattice(std::span<const int> q) const;

    // Float-mode consistency check over the l1-ball |q| <= q_max. Throws
    // ambiguity_error naming the first offending q. No-op in rational mode.
    void audit(int q_max) const;

    // Least common denominator of the exact values (1 in float mode).
    std::int64_t common_denominator() const;

private:
    frequency() = default;

    frequency_mode m_mode = frequency_mode::rational;
    std::vector<double> m_values;
    std::vector<rational> m_exact;
    std::vector<std::vector<int>> m_lattice;
    double m_tol = 0.0;
};

// sigma_q = sign <omega,q>, omega_q = |<omega,q>|.
struct sign_divisor {
    int sign = 0;
    rate divisor;
};

sign_divisor sigma_omega(const frequency &omega, std::span<const int> q);

// Omega_s = max 1/|<omega,q>| over nonresonant integer q with |q|_1 <= s.
//
// Brute force over the l1-ball, O((2s+1)^n) inner products; meant for n <= 4
// and s <= 40.
double omega_capital(const frequency &omega, int s);

// omega = lambda q / p with p > 0 and gcd(|q_1|, ..., |q_n|, p) = 1.
struct corank_one_data {
    std::vector<int> q;
    std::int64_t p = 1;
    double lambda = 0.0;

    // Lower bound lambda/p for every nonresonant divisor.
    double min_divisor() const
    {
        return lambda / static_cast<double>(p);
    }
};

corank_one_data corank1_decompose(const frequency &omega);

// Rank of the resonance lattice. Rational mode computes it exactly (a nonzero
// omega has an (n-1)-dimensional integer kernel); float mode returns the rank
// of the declared generators. `search_bound` must be >= 1 and is used to
// audit float-mode declarations.
int lattice_rank(const frequency &omega, int search_bound);

// Calls `visit(q)` for every q in Z^n with |q|_1 <= radius, in a fixed order.
template <typename F>
void for_each_in_l1_ball(std::size_t n, int radius, F &&visit);

// JSON: {"mode":"rational","values":["1/2","1/3"]} or
//       {"mode":"float","values":[...],"lattice":[[...]],"tol":1e-9}
frequency frequency_from_json(const nlohmann::json &j);
nlohmann::json to_json(const frequency &omega);

namespace detail
{
void l1_ball_rec(std::vector<int> &q, std::size_t pos, int remaining, const auto &visit)
{
    if (pos == q.size()) {
        visit(std::span<const int>(q));
        return;
    }
    for (int v = -remaining; v <= remaining; ++v) {
        q[pos] = v;
        l1_ball_rec(q, pos + 1, remaining - (v < 0 ? -v : v), visit);
    }
    q[pos] = 0;
}
} // namespace detail

template <typename F>
void for_each_in_l1_ball(std::size_t n, int radius, F &&visit)
{
    std::vector<int> q(n, 0);
    detail::l1_ball_rec(q, 0, radius, visit);
}

} // namespace normflow

#endif
