#include <normflow/majorant.hpp>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <normflow/errors.hpp>

namespace normflow
{

namespace
{

constexpr double rel_slack = 1e-12;

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

} // namespace

majorant_fn majorant_fn::rational_form(double a, double b, int s)
{
    if (!(a >= 0) || !(b > 0) || s < 0) {
        throw domain_error("majorant_fn: rational form needs a >= 0, b > 0, s >= 0");
    }
    majorant_fn m;
    m.m_kind = kind::rational_form;
    m.m_a = a;
    m.m_b = b;
    m.m_s = s;
    return m;
}

majorant_fn majorant_fn::series(std::vector<double> coeffs)
{
    for (double c : coeffs) {
        if (!(c >= 0) || !std::isfinite(c)) {
            throw domain_error("majorant_fn: series coefficients must be finite and nonnegative");
        }
    }
    majorant_fn m;
    m.m_kind = kind::series;
    m.m_coeffs = std::move(coeffs);
    return m;
}

double majorant_fn::coeff(int j) const
{
    if (j < 0) {
        return 0.0;
    }
    if (m_kind == kind::series) {
        return static_cast<std::size_t>(j) < m_coeffs.size() ? m_coeffs[j] : 0.0;
    }
    if (j < m_s) {
        return 0.0;
    }
    return m_a * std::pow(m_b, m_s - 1 - j);
}

std::vector<double> majorant_fn::expand(int K) const
{
    std::vector<double> out(std::max(K, -1) + 1);
    for (int j = 0; j <= K; ++j) {
        out[j] = coeff(j);
    }
    return out;
}

double majorant_fn::radius() const
{
    return m_kind == kind::rational_form ? m_b : std::numeric_limits<double>::infinity();
}

majorant_fn majorant_fn::scaled(double factor) const
{
    if (!(factor >= 0)) {
        throw domain_error("majorant_fn: scale factor must be nonnegative");
    }
    majorant_fn m = *this;
    m.m_a *= factor;
    for (auto &c : m.m_coeffs) {
        c *= factor;
    }
    return m;
}

bool dominates(const formal_series &f, const majorant_fn &m)
{
    for (const auto &[k, c] : f) {
        if (std::abs(c) > m.coeff(k.degree()) * (1 + rel_slack)) {
            return false;
        }
    }
    return true;
}

majorant_fn geometric_majorant(const formal_series &f, double a, double rho, int s)
{
    if (!(rho > 0) || !(a >= 0)) {
        throw domain_error("geometric_majorant: need a >= 0 and rho > 0");
    }
    for (const auto &[k, c] : f) {
        const double bound = a * std::pow(rho, s - k.degree());
        if (std::abs(c) > bound * (1 + rel_slack)) {
            throw bound_violation("majorant", "geometric_majorant",
                                  "k=" + k.to_string() + " |F_k|=" + fmt(std::abs(c)) + " > a rho^(s-|k|)="
                                      + fmt(bound));
        }
    }
    return majorant_fn::rational_form(a * rho, rho, s);
}

majorant_fn derivative_majorant(double rho)
{
    if (!(rho > 0)) {
        throw domain_error("derivative_majorant: rho must be positive");
    }
    return majorant_fn::rational_form(2 * rho, rho / 2, 2);
}

std::optional<int> derivative_majorant_violation(double rho, int K)
{
    const auto f = majorant_fn::rational_form(rho, rho, 3);
    const auto g = derivative_majorant(rho);
    for (int j = 0; j <= K; ++j) {
        const double left = (j + 1) * f.coeff(j + 1);
        if (left > g.coeff(j) * (1 + rel_slack)) {
            return j;
        }
    }
    return std::nullopt;
}

double burgers_radius(double a, double b, double tau)
{
    if (!(a > 0) || !(b > 0) || !(tau >= 0)) {
        throw domain_error("burgers: need a > 0, b > 0, tau >= 0");
    }
    const double at = a * tau;
    return b / (1 + 2 * at + 2 * std::sqrt(at * (1 + at)));
}

std::complex<double> burgers_solve(double a, double b, double tau, std::complex<double> zeta)
{
    const double r = burgers_radius(a, b, tau);
    if (!(std::abs(zeta) < r)) {
        throw domain_error("burgers_solve: |zeta| = " + fmt(std::abs(zeta)) + " outside analyticity radius "
                           + fmt(r));
    }
    if (zeta == std::complex<double>{}) {
        return {};
    }
    const double at = a * tau;
    const std::complex<double> d = b - (1 + 2 * at) * zeta;
    const std::complex<double> w = 4 * at * (1 + at) * zeta * zeta / (d * d);
    return 2 * a * zeta * zeta / (d * (1.0 + std::sqrt(1.0 - w)));
}

std::vector<double> burgers_series(double a, double b, double tau, int K)
{
    if (!(a > 0) || !(b > 0) || !(tau >= 0) || K < 0) {
        throw domain_error("burgers_series: need a > 0, b > 0, tau >= 0, K >= 0");
    }
    const auto mul = [K](const std::vector<double> &x, const std::vector<double> &y) {
        std::vector<double> z(K + 1, 0.0);
        for (int i = 0; i <= K; ++i) {
            for (int j = 0; i + j <= K; ++j) {
                z[i + j] += x[i] * y[j];
            }
        }
        return z;
    };
    std::vector<double> g(K + 1, 0.0);
    // G = O(zeta^2): each substitution fixes at least one more coefficient.
    for (int it = 0; it <= K; ++it) {
        std::vector<double> u(K + 1, 0.0);
        for (int j = 0; j <= K; ++j) {
            u[j] = tau * g[j] + (j == 1 ? 1.0 : 0.0);
        }
        // 1 / (b - u) with u(0) = 0.
        std::vector<double> inv(K + 1, 0.0);
        inv[0] = 1 / b;
        for (int j = 1; j <= K; ++j) {
            double s = 0;
            for (int i = 1; i <= j; ++i) {
                s += u[i] * inv[j - i];
            }
            inv[j] = s / b;
        }
        auto next = mul(mul(u, u), inv);
        for (auto &c : next) {
            c *= a;
        }
        g = std::move(next);
    }
    return g;
}

analyticity_result analyticity_bounds(double h, double rho, int n, double delta)
{
    if (!(h > 0) || !(rho > 0) || n < 1 || !(delta >= 0)) {
        throw domain_error("analyticity_bounds: need h > 0, rho > 0, n >= 1, delta >= 0");
    }
    analyticity_result r;
    const double g = 1 + 32.0 * n * h * rho * delta;
    r.radius = rho / (4 * g);
    r.bound = h * rho * rho * rho / (4 * g * g * g);
    r.a = 2 * h * rho;
    r.b = rho / 2;
    r.tau = 8.0 * n * delta;
    const double q = 1 + 2 * r.a * r.tau;
    const double radius2 = r.b / (2 * q);
    const double bound2 = r.a * r.b * r.b / (2 * q * q * q);
    if (std::abs(radius2 - r.radius) > 1e-12 * r.radius || std::abs(bound2 - r.bound) > 1e-12 * r.bound) {
        throw bound_violation("majorant", "analyticity_bounds",
                              "closed form and Burgers form disagree: radius " + fmt(r.radius) + " vs "
                                  + fmt(radius2) + ", bound " + fmt(r.bound) + " vs " + fmt(bound2));
    }
    return r;
}

polydisk_sample_report sample_flow_on_polydisk(const flow_solution &sol, double delta, double radius, double bound,
                                               std::uint64_t seed)
{
    polydisk_sample_report rep;
    rep.radius = radius;
    rep.bound = bound;
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    const std::size_t n = sol.initial().n();
    const int K = sol.truncation();
    const formal_series s = sol.calH_series(delta);

    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> weight(1.0);
    std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);

    std::vector<std::complex<double>> z(n), zbar(n);
    std::vector<double> degree_sum(K + 1);
    for (const double fraction : {0.5, 0.9, 0.99}) {
        const double r = fraction * radius;
        for (int p = 0; p < 64; ++p) {
            std::vector<double> w(2 * n);
            double total = 0;
            for (auto &x : w) {
                x = weight(rng);
                total += x;
            }
            for (std::size_t j = 0; j < n; ++j) {
                z[j] = std::polar(r * w[j] / total, phase(rng));
                zbar[j] = std::polar(r * w[n + j] / total, phase(rng));
            }
            std::fill(degree_sum.begin(), degree_sum.end(), 0.0);
            std::complex<double> value{};
            for (const auto &[k, c] : s) {
                std::complex<double> m = c;
                for (std::size_t j = 0; j < n; ++j) {
                    m *= std::pow(z[j], k.k(j)) * std::pow(zbar[j], k.kbar(j));
                }
                value += m;
                degree_sum[k.degree()] += std::abs(m);
            }
            double tail = 0.0;
            if (K >= 1 && degree_sum[K] > 0) {
                const double q = degree_sum[K - 1] > 0 ? degree_sum[K] / degree_sum[K - 1]
                                                       : std::numeric_limits<double>::infinity();
                tail = q < 1 ? degree_sum[K] * q / (1 - q) : std::numeric_limits<double>::infinity();
            }
            const double excess = std::abs(value) - bound - tail;
            ++rep.samples;
            if (excess > rep.worst_excess) {
                rep.worst_excess = excess;
                rep.worst_value = std::abs(value);
                rep.worst_tail = tail;
            }
        }
    }
    rep.ok = rep.worst_excess <= 0;
    return rep;
}

near_identity_inverse::near_identity_inverse(function phi, double rho, double sup_phi)
    : m_phi(std::move(phi)), m_rho(rho), m_sup(sup_phi)
{
}

std::complex<double> near_identity_inverse::operator()(std::complex<double> x) const
{
    if (std::abs(x) > m_rho * (1 + rel_slack)) {
        throw domain_error("near_identity_inverse: |x| exceeds rho");
    }
    std::complex<double> psi{};
    for (int it = 0; it < 1000; ++it) {
        const std::complex<double> next = -m_phi(x + psi);
        if (std::abs(next - psi) <= 1e-15 * std::max(1.0, std::abs(next))) {
            return next;
        }
        psi = next;
    }
    throw domain_error("near_identity_inverse: fixed-point iteration did not converge");
}

near_identity_inverse invert_near_identity(near_identity_inverse::function phi, double rho)
{
    if (!(rho > 0)) {
        throw domain_error("invert_near_identity: rho must be positive");
    }
    double sup = std::abs(phi(0.0));
    for (const double f : {0.25, 0.5, 0.75, 0.9, 1.0}) {
        for (int p = 0; p < 64; ++p) {
            const auto y = std::polar(6 * rho * f, 2 * std::numbers::pi * p / 64.0);
            sup = std::max(sup, std::abs(phi(y)));
        }
    }
    if (sup > rho / 2) {
        throw bound_violation("majorant", "invert_near_identity",
                              "sampled sup|phi| = " + fmt(sup) + " > rho/2 = " + fmt(rho / 2) + " on |y| <= 6 rho");
    }
    return near_identity_inverse(std::move(phi), rho, sup);
}

degenerate_result degenerate_bounds(double a, double b, int r, double tau)
{
    if (!(a > 0) || !(b > 0) || r < 3 || !(tau > 0)) {
        throw domain_error("degenerate_bounds: need a > 0, b > 0, r >= 3, tau > 0");
    }
    degenerate_result res;
    const double small = b / 12;
    const double large = std::pow(b / (24 * a * tau), 1.0 / (r - 2)) / 6;
    res.small_tau_branch = small <= large;
    res.rho_dom = std::min(small, large);
    res.g_bound = res.rho_dom / (2 * tau);
    const double p = std::pow(6 * res.rho_dom, r - 1);
    res.phi_bound = a * tau * p / (b - 6 * res.rho_dom);
    res.phi_bound_relaxed = 2 * a * tau * p / b;
    if (res.phi_bound > res.phi_bound_relaxed * (1 + rel_slack)
        || res.phi_bound_relaxed > res.rho_dom / 2 * (1 + rel_slack)) {
        throw bound_violation("majorant", "degenerate_bounds",
                              "chain " + fmt(res.phi_bound) + " <= " + fmt(res.phi_bound_relaxed)
                                  + " <= " + fmt(res.rho_dom / 2) + " fails");
    }
    return res;
}

zeta_flow::zeta_flow(const majorant_fn &initial, std::size_t n, int K) : m_n(n), m_K(K), m_poly(K + 1)
{
    if (n == 0) {
        throw dimension_error("zeta_flow: n must be positive");
    }
    for (int j = 0; j < std::min(3, K + 1); ++j) {
        if (initial.coeff(j) != 0.0) {
            throw domain_error("zeta_flow: initial majorant must vanish to order 3");
        }
    }
    const double c = 4.0 * static_cast<double>(n);
    for (int j = 3; j <= K; ++j) {
        std::vector<double> rhs;
        for (int p = 3; p + 3 <= j + 2; ++p) {
            const int q = j + 2 - p;
            const auto &fp = m_poly[p];
            const auto &fq = m_poly[q];
            if (fp.empty() || fq.empty()) {
                continue;
            }
            if (rhs.size() < fp.size() + fq.size() - 1) {
                rhs.resize(fp.size() + fq.size() - 1, 0.0);
            }
            for (std::size_t x = 0; x < fp.size(); ++x) {
                for (std::size_t y = 0; y < fq.size(); ++y) {
                    rhs[x + y] += c * p * q * fp[x] * fq[y];
                }
            }
        }
        std::vector<double> fj(rhs.size() + 1, 0.0);
        fj[0] = initial.coeff(j);
        for (std::size_t x = 0; x < rhs.size(); ++x) {
            fj[x + 1] = rhs[x] / static_cast<double>(x + 1);
        }
        m_poly[j] = std::move(fj);
    }
}

double zeta_flow::coeff(int j, double delta) const
{
    if (j < 0 || j > m_K) {
        throw domain_error("zeta_flow: degree outside [0, K]");
    }
    double v = 0.0;
    const auto &p = m_poly[j];
    for (std::size_t i = p.size(); i > 0; --i) {
        v = v * delta + p[i - 1];
    }
    return v;
}

double zeta_flow::majorant_coeff(const multi_index &k, double delta) const
{
    if (k.n() != m_n) {
        throw dimension_error("zeta_flow: index dimension mismatch");
    }
    return coeff(k.degree(), delta) * multinomial(k);
}

domination_report verify_domination(const flow_solution &exact, const majorant_solution &majorant,
                                    std::span<const double> delta_grid)
{
    domination_report rep;
    for (const auto &[k, c] : exact.initial()) {
        const double m = majorant(k, 0.0);
        if (std::abs(c) > m * (1 + rel_slack)) {
            if (rep.initial_dominated) {
                rep.initial_dominated = false;
                if (!rep.witness) {
                    rep.witness = domination_row{k, 0.0, std::abs(c), m, m - std::abs(c), 0.0};
                }
            }
            ++rep.violations;
        }
    }
    for (const double d : delta_grid) {
        for (const auto &[k, p] : exact.coefficients()) {
            const double e = std::abs(ep_eval(p, d));
            const double m = majorant(k, d);
            const double err = 4.0 * static_cast<double>(p.size() + 2) * DBL_EPSILON * ep_magnitude(p, d);
            domination_row row{k, d, e, m, m - e, err};
            if (e > m * (1 + rel_slack) + err) {
                ++rep.violations;
                if (!rep.witness) {
                    rep.witness = row;
                }
            }
            rep.rows.push_back(row);
        }
    }
    return rep;
}

domination_report verify_domination(const flow_solution &exact, const zeta_flow &majorant,
                                    std::span<const double> delta_grid)
{
    if (majorant.truncation() < exact.truncation()) {
        throw domain_error("verify_domination: majorant truncated below the flow");
    }
    return verify_domination(
        exact, [&majorant](const multi_index &k, double d) { return majorant.majorant_coeff(k, d); }, delta_grid);
}

double sublinear_constant(double c_f, double rho, double alpha, const std::function<double(int)> &b, int q_max)
{
    if (!(rho > 0)) {
        throw domain_error("sublinear_constant: rho must be positive");
    }
    double sup = 0.0;
    for (int q = 0; q <= q_max; ++q) {
        sup = std::max(sup, c_f * std::exp(-b(q) - (alpha + std::log(rho)) * q));
    }
    return sup;
}

std::optional<multi_index> find_sublinear_violation(const formal_series &f, double c, double alpha,
                                                    const std::function<double(int)> &b)
{
    for (const auto &[k, v] : f) {
        const int d = k.degree();
        if (std::abs(v) > c * std::exp(b(d) + alpha * d) * (1 + rel_slack)) {
            return k;
        }
    }
    return std::nullopt;
}

} // namespace normflow
