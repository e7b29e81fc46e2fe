#ifndef NORMFLOW_MULTI_INDEX_HPP
#define NORMFLOW_MULTI_INDEX_HPP

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace normflow
{

// Exponent vector k = (k, kbar) of the monomial z^k zbar^kbar in 2n variables.
//
// Storage is a fixed inline array so that indices are cheap to copy, hash and
// compare; the order is lexicographic over (k_1..k_n, kbar_1..kbar_n).
class multi_index
{
public:
    static constexpr std::size_t max_dof = 8;
    static constexpr int max_exponent = 255;

    multi_index() = default;
    explicit multi_index(std::size_t n);
    multi_index(std::span<const int> k, std::span<const int> kbar);

    // e_j = (e_j, e_j): the index of z_j zbar_j.
    static multi_index unit_pair(std::size_t n, std::size_t j);

    std::size_t n() const noexcept
    {
        return m_n;
    }
    int k(std::size_t j) const noexcept
    {
        return m_e[j];
    }
    int kbar(std::size_t j) const noexcept
    {
        return m_e[m_n + j];
    }
    // Raw access over the 2n exponents, k first.
    int exponent(std::size_t i) const noexcept
    {
        return m_e[i];
    }
    void set_exponent(std::size_t i, int value);

    int degree() const noexcept;
    // k' = kbar - k.
    std::vector<int> prime() const;
    // k* = (kbar, k).
    multi_index star() const;
    bool is_self_conjugate() const noexcept;

    std::vector<int> k_vector() const;
    std::vector<int> kbar_vector() const;

    // Componentwise sum; dimension must match.
    multi_index operator+(const multi_index &other) const;
    // Componentwise difference, or false if any component would be negative.
    bool try_subtract(const multi_index &other, multi_index &out) const;

    std::string to_string() const;

    friend bool operator==(const multi_index &, const multi_index &) = default;
    friend std::strong_ordering operator<=>(const multi_index &a, const multi_index &b);

    std::size_t hash() const noexcept;

private:
    std::uint8_t m_n = 0;
    std::array<std::uint8_t, 2 * max_dof> m_e{};
};

// All indices in 2n variables with the given total degree, in lexicographic order.
std::vector<multi_index> indices_of_degree(std::size_t n, int degree);

// Multinomial coefficient |k|! / prod(k_i!) as a double.
double multinomial(const multi_index &k);

} // namespace normflow

template <>
struct std::hash<normflow::multi_index> {
    std::size_t operator()(const normflow::multi_index &k) const noexcept
    {
        return k.hash();
    }
};

#endif
