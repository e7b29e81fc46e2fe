#include <normflow/scheduler.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <normflow/errors.hpp>
#include <normflow/fit.hpp>
#include <normflow/majorant.hpp>

namespace normflow
{

namespace
{

constexpr double rel_slack = 1e-12;

int pow2(int j)
{
    return 1 << j;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::vector<double> make_a_sequence(const frequency &omega, std::size_t n, int J)
{
    if (J < 0) {
        throw domain_error("make_a_sequence: J must be >= 0");
    }
    const double dn = static_cast<double>(n);
    std::vector<double> a;
    for (int j = 0; j <= J; ++j) {
        const int s = pow2(j) + 2;
        a.push_back(dn * std::pow(2.0, 2 * dn + j) * std::pow(static_cast<double>(s), 2 * dn + 1)
                    * omega_capital(omega, s));
    }
    return a;
}

bruno_result bruno_check(std::span<const double> a, int J)
{
    if (J < 0 || static_cast<std::size_t>(J) >= a.size()) {
        throw input_error("bruno_check: need a_0..a_J");
    }
    bruno_result res;
    for (int j = 0; j <= J; ++j) {
        if (!(a[j] >= 1.0)) {
            throw input_error("bruno_check: a_" + std::to_string(j) + " = " + fmt(a[j]) + " < 1");
        }
        if (j > 0 && a[j] < a[j - 1]) {
            throw input_error("bruno_check: a decreases at j = " + std::to_string(j));
        }
        const double t = std::ldexp(std::log(a[j]), -j);
        res.terms.push_back(t);
        res.partial_sum += t;
    }
    const double last = res.terms.back();
    if (last == 0.0) {
        res.evidence_yes = true;
    } else if (J >= 1) {
        res.evidence_yes = last / res.terms[J - 1] < 0.9;
    }
    return res;
}

sequence_pair::sequence_pair(std::vector<double> a, int J) : m_a(std::move(a)), m_J(J)
{
    if (J < 0 || static_cast<std::size_t>(J) >= m_a.size()) {
        throw input_error("b_from_a: need a_0..a_J");
    }
    m_a.resize(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j) {
        if (!(m_a[j] >= 1.0) || !std::isfinite(m_a[j])) {
            throw input_error("b_from_a: a_" + std::to_string(j) + " = " + fmt(m_a[j]) + " is not a finite value >= 1");
        }
        if (j > 0 && m_a[j] < m_a[j - 1]) {
            throw input_error("b_from_a: a decreases at j = " + std::to_string(j));
        }
    }
    // Anchors A_j = b_{2^j+2}, j = 0..J+1. With a frozen beyond J the series
    // -(1/2) sum_i 2^{-i} ln a_{j+i} sums in closed form to
    // -(1/2) [sum_{i<J-j} 2^{-i} ln a_{j+i} + 2^{1-(J-j)} ln a_J].
    std::vector<double> anchors(static_cast<std::size_t>(J) + 2);
    const double lnaJ = std::log(m_a[J]);
    anchors[J + 1] = -lnaJ;
    anchors[J] = -lnaJ;
    for (int j = J - 1; j >= 0; --j) {
        // Consecutive anchors satisfy A_{j+1} = 2 A_j + ln a_j.
        double sum = std::ldexp(lnaJ, 1 - (J - j));
        for (int i = J - j - 1; i >= 0; --i) {
            sum += std::ldexp(std::log(m_a[j + i]), -i);
        }
        anchors[j] = -0.5 * sum;
    }
    const int s_last = pow2(J + 1) + 2;
    m_b.assign(static_cast<std::size_t>(s_last) + 1, 0.0);
    for (int j = 0; j <= J; ++j) {
        const int lo = pow2(j) + 2;
        const int hi = pow2(j + 1) + 2;
        const double width = hi - lo;
        for (int s = lo; s < hi; ++s) {
            const double t = (s - lo) / width;
            m_b[s] = (1 - t) * anchors[j] + t * anchors[j + 1];
        }
    }
    m_b[s_last] = anchors[J + 1];
}

double sequence_pair::b(int s) const
{
    if (s < 3) {
        throw domain_error("sequence_pair: b_s is defined for s >= 3, got " + std::to_string(s));
    }
    if (s > s_max()) {
        return m_b.back();
    }
    return m_b[s];
}

double sequence_pair::anchor(int j) const
{
    if (j < 0) {
        throw domain_error("sequence_pair: anchor index must be >= 0");
    }
    if (j > m_J + 1) {
        return m_b.back();
    }
    return m_b[pow2(j) + 2];
}

sequence_pair b_from_a(std::span<const double> a, int J)
{
    return sequence_pair(std::vector<double>(a.begin(), a.end()), J);
}

convexity_report convexity_inequalities(const sequence_pair &seq, int lo, int hi, double slack)
{
    if (lo < seq.s_min() || hi > seq.s_max() || lo > hi) {
        throw domain_error("convexity_inequalities: index range [" + std::to_string(lo) + ", " + std::to_string(hi)
                           + "] outside the stored range [" + std::to_string(seq.s_min()) + ", "
                           + std::to_string(seq.s_max()) + "]");
    }
    convexity_report rep;
    for (int m = lo; m <= hi; ++m) {
        for (int k = m + 1; k <= hi; ++k) {
            for (int l = k + 1; l <= hi; ++l) {
                ++rep.checked;
                const double v = (l - k) * seq.b(m) + (m - l) * seq.b(k) + (k - m) * seq.b(l);
                const double scale = (l - m) * (std::abs(seq.b(m)) + std::abs(seq.b(k)) + std::abs(seq.b(l))) + 1;
                if (v < -slack * scale) {
                    rep.three_point = false;
                    if (!rep.witness) {
                        rep.witness = "three-point inequality fails at (m,k,l) = (" + std::to_string(m) + ","
                                      + std::to_string(k) + "," + std::to_string(l) + "): " + fmt(v);
                    }
                }
            }
        }
    }
    for (int k = lo; k <= hi; ++k) {
        for (int l = k; l <= hi; ++l) {
            for (int m = 1; m < k && k - m >= lo && l + m <= hi; ++m) {
                ++rep.checked;
                const double lhs = seq.b(k) + seq.b(l);
                const double rhs = seq.b(k - m) + seq.b(l + m);
                const double scale = std::abs(lhs) + std::abs(rhs) + 1;
                if (lhs > rhs + slack * scale) {
                    rep.exchange = false;
                    if (!rep.witness) {
                        rep.witness = "exchange inequality fails at (m,k,l) = (" + std::to_string(m) + ","
                                      + std::to_string(k) + "," + std::to_string(l) + "): " + fmt(lhs - rhs);
                    }
                }
            }
        }
    }
    return rep;
}

averaging_result averaging_step(const formal_series &h, const frequency &omega, int s, double c, double alpha,
                                const sequence_pair &b, int K)
{
    if (s < 3) {
        throw domain_error("averaging_step: s must be >= 3");
    }
    if (h.n() != omega.n()) {
        throw dimension_error("averaging_step: series and frequency have different n");
    }
    if (alpha < 0 || !(c > 0)) {
        throw domain_error("averaging_step: need alpha >= 0 and c > 0");
    }
    const std::size_t n = h.n();
    K = std::min(K, h.truncation());
    if (const auto d = h.min_degree(); d && *d < s) {
        throw domain_error("averaging_step: input has a term of degree " + std::to_string(*d) + " < s = "
                           + std::to_string(s));
    }
    const auto bfun = [&b](int q) { return b.b(q); };
    if (const auto bad = find_sublinear_violation(h, c, alpha, bfun)) {
        throw bound_violation("scheduler", "averaging_step",
                              "input coefficient " + bad->to_string() + " = " + fmt(std::abs(h.coeff(*bad)))
                                  + " exceeds c e^{b + alpha |k|} = "
                                  + fmt(c * std::exp(b.b(bad->degree()) + alpha * bad->degree())));
    }

    const divisor_table divisors(omega, n, K);
    const int band_hi = 2 * s - 3;
    averaging_result res{formal_series(n, K), formal_series(n, K)};

    // Band coefficients in the H gauge: e^{-omega_{k'} delta} H_k.
    std::map<multi_index, exp_poly> coeff;
    std::vector<multi_index> moving;
    for (const auto &[k, v] : h) {
        const int d = k.degree();
        if (d > K) {
            continue;
        }
        if (d <= band_hi) {
            const auto &sd = divisors(k);
            coeff.emplace(k, exp_poly(0, sd.divisor, v));
            if (sd.sign == 0) {
                res.g0.set(k, v);
                res.band_residual = std::max(res.band_residual, std::abs(v));
            } else {
                moving.push_back(k);
            }
        }
    }

    // Degrees >= 2s-2: d H_k / d delta = sum -sigma_x w X_x Y_y over band
    // nonresonant x and any y already known, with k = x + y - e_j. The
    // partner degree |y| = |k| + 2 - |x| < |k|, so degrees close one by one.
    for (int d = 2 * s - 2; d <= K; ++d) {
        std::map<multi_index, exp_poly> integrand;
        for (const auto &x : moving) {
            const int dy = d + 2 - x.degree();
            const auto &sx = divisors(x);
            const exp_poly &X = coeff.at(x);
            for (const auto &[y, Y] : coeff) {
                if (y.degree() != dy) {
                    continue;
                }
                const multi_index sum = x + y;
                for (std::size_t j = 0; j < n; ++j) {
                    const int w = x.kbar(j) * y.k(j) - x.k(j) * y.kbar(j);
                    if (w == 0) {
                        continue;
                    }
                    multi_index k;
                    if (!sum.try_subtract(multi_index::unit_pair(n, j), k)) {
                        continue;
                    }
                    const exp_poly term = ep_mul(X, Y).scaled(static_cast<double>(-sx.sign * w));
                    auto it = integrand.find(k);
                    if (it == integrand.end()) {
                        integrand.emplace(k, term);
                    } else {
                        it->second = ep_add(it->second, term);
                    }
                }
            }
        }
        std::map<multi_index, exp_poly> level;
        for (const auto &k : indices_of_degree(n, d)) {
            const auto c0 = h.coeff(k);
            auto it = integrand.find(k);
            exp_poly p = c0 == std::complex<double>{} ? exp_poly{} : exp_poly(c0);
            if (it != integrand.end()) {
                p = ep_add(p, ep_integrate(it->second));
            }
            if (!p.is_zero()) {
                level.emplace(k, std::move(p));
            }
        }
        for (auto &[k, p] : level) {
            res.g.set(k, ep_limit_infinity(p));
            coeff.emplace(k, std::move(p));
        }
    }

    const double dn = static_cast<double>(n);
    res.lambda = 0.5 * dn * std::exp(2 * alpha) * std::pow(2.0 * s, 2 * dn + 1)
                 * std::exp(2 * b.b(s) - b.b(2 * s - 2));
    res.epsilon = c * res.lambda * omega_capital(omega, 2 * s - 2);
    res.rho_prime = std::exp(-alpha) * (1 - res.epsilon / (dn * s));

    if (const auto bad = find_sublinear_violation(res.g, c, alpha + res.epsilon, bfun)) {
        throw bound_violation("scheduler", "averaging_step",
                              "output coefficient " + bad->to_string() + " = " + fmt(std::abs(res.g.coeff(*bad)))
                                  + " exceeds c e^{b + (alpha + eps) |k|} = "
                                  + fmt(c * std::exp(b.b(bad->degree()) + (alpha + res.epsilon) * bad->degree())));
    }
    return res;
}

int pipeline_steps(int r)
{
    int N = 0;
    while (pow2(N) + 2 < r) {
        ++N;
    }
    return N;
}

pipeline_result normalize_low_orders(const formal_series &h, const frequency &omega, int r, double c0, double alpha0,
                                     const sequence_pair &b, int K)
{
    if (r < 3) {
        throw domain_error("normalize_low_orders: r must be >= 3");
    }
    const std::size_t n = h.n();
    const double dn = static_cast<double>(n);
    const double ce = c0 * std::exp(2 * alpha0);
    if (!(ce <= 1.0 / 16 * (1 + rel_slack))) {
        throw domain_error("normalize_low_orders: c0 e^{2 alpha0} = " + fmt(ce) + " exceeds 1/16");
    }
    if (!(dn * std::exp(2 * alpha0) >= 2 * (1 - rel_slack))) {
        throw domain_error("normalize_low_orders: n e^{2 alpha0} < 2");
    }
    pipeline_result res{formal_series(n, std::min(K, h.truncation())), {}};
    res.alpha0 = alpha0;
    res.c0 = c0;
    res.epsilon0 = 2 * ce;
    res.epsilon0_squared = 2 * c0 * ce;
    res.rho0 = std::exp(-alpha0);
    res.epsilon_chain_ok = res.epsilon0 <= 0.125 * (1 + rel_slack);

    double max_input = 0;
    for (const auto &[k, v] : h) {
        max_input = std::max(max_input, std::abs(v));
    }

    formal_series current = h.truncated(res.g.truncation());
    formal_series lower(n, res.g.truncation());
    double alpha = alpha0;
    double rho = res.rho0;
    const int N = pipeline_steps(r);
    for (int m = 1; m <= N; ++m) {
        const int s = pow2(m - 1) + 2;
        const auto step = averaging_step(current, omega, s, c0, alpha, b, res.g.truncation());
        step_certificate cert;
        cert.m = m;
        cert.s = s;
        cert.epsilon = step.epsilon;
        cert.epsilon_closed = c0 * std::exp(2 * alpha) / pow2(m - 1);
        cert.lambda = step.lambda;
        cert.alpha = alpha + step.epsilon;
        cert.rho = std::exp(-cert.alpha);
        cert.band_residual = step.band_residual;
        const double rhs = rho - step.epsilon / (dn * s * std::exp(alpha)) * std::pow(rho * std::exp(alpha), s - 1);
        cert.rho_inequality = cert.rho <= rhs * (1 + rel_slack) && cert.rho > 0;
        if (!(cert.epsilon <= std::ldexp(1.0, -m - 2) * (1 + rel_slack))) {
            res.epsilon_chain_ok = false;
        }
        res.epsilon_sum += cert.epsilon;
        res.certificates.push_back(cert);
        lower = series_add(lower, step.g0);
        current = step.g;
        alpha = cert.alpha;
        rho = cert.rho;
    }
    res.g = series_add(lower, current);
    res.rho_star = rho;
    res.epsilon_sum_ok = res.epsilon_sum <= 0.5 * (1 + rel_slack);
    res.rho_star_ok = res.rho_star >= res.rho0 * std::exp(-0.5) * (1 - rel_slack);
    for (const auto &[k, v] : res.g) {
        if (k.degree() < r) {
            res.residual_below_r = std::max(res.residual_below_r, std::abs(v));
        }
    }
    res.relative_residual_below_r = max_input > 0 ? res.residual_below_r / max_input : 0.0;
    res.residual_ok = res.relative_residual_below_r < 1e-10;
    return res;
}

pipeline_constants choose_pipeline_constants(const formal_series &h, const sequence_pair &b)
{
    const double dn = static_cast<double>(h.n());
    double alpha0 = std::max(0.0, 0.5 * std::log(2.0 / dn));
    for (const auto &[k, v] : h) {
        const int d = k.degree();
        if (d < 3) {
            throw domain_error("choose_pipeline_constants: input has a term of degree " + std::to_string(d));
        }
        alpha0 = std::max(alpha0, (std::log(16 * std::abs(v)) - b.b(d)) / (d - 2));
    }
    return {alpha0, std::exp(-2 * alpha0) / 16};
}

split_result corank1_split(const flow_solution &sol, const corank_one_data &data, std::span<const double> deltas,
                           double rho, double fit_lo, double fit_hi)
{
    if (static_cast<int>(data.q.size()) != static_cast<int>(sol.omega().n())) {
        throw dimension_error("corank1_split: decomposition and flow have different n");
    }
    split_result res;
    res.lambda_over_p = data.min_divisor();
    res.rho = rho;
    res.fit_lo = fit_lo;
    res.fit_hi = fit_hi;
    res.leading_rate = std::numeric_limits<double>::infinity();

    const std::size_t n = sol.omega().n();
    const int K = sol.truncation();
    for (const auto &[k, p] : sol.coefficients()) {
        const auto &sd = sol.divisors()(k);
        if (sd.sign == 0) {
            continue;
        }
        if (sd.divisor.value < res.lambda_over_p - 1e-12) {
            throw bound_violation("scheduler", "corank1_split",
                                  "nonresonant index " + k.to_string() + " has divisor " + fmt(sd.divisor.value)
                                      + " below lambda/p = " + fmt(res.lambda_over_p));
        }
        const auto row = leading_behaviour(sol, k);
        if (row.leading_rate < res.leading_rate - 1e-12) {
            res.leading_rate = row.leading_rate;
            res.leading_power = row.leading_power;
        } else if (std::abs(row.leading_rate - res.leading_rate) <= 1e-12) {
            res.leading_power = std::max(res.leading_power, row.leading_power);
        }
    }

    for (double delta : deltas) {
        split_entry e{delta, formal_series(n, K), formal_series(n, K)};
        for (const auto &[k, p] : sol.coefficients()) {
            const auto &sd = sol.divisors()(k);
            if (sd.sign == 0) {
                e.g0.set(k, ep_eval(p, delta));
            } else {
                e.gstar.set(k, sol.h_coeff(k, delta));
            }
        }
        e.norm_g0 = norm_upper_estimate(e.g0, rho);
        e.norm_gstar = norm_upper_estimate(e.gstar, rho);
        const double total = norm_upper_estimate(series_add(e.g0, e.gstar), rho);
        e.ratio = total > 0 ? e.norm_gstar / total : 0.0;
        e.bound = std::exp(-res.lambda_over_p * delta);
        res.entries.push_back(std::move(e));
    }

    if (!res.entries.empty()) {
        const auto &last = res.entries.back().g0;
        for (const auto &e : res.entries) {
            res.resonant_variation = std::max(res.resonant_variation, max_coeff_diff(e.g0, last));
        }
    }

    std::vector<double> xs, ys;
    for (const auto &e : res.entries) {
        if (e.delta >= fit_lo && e.delta <= fit_hi && e.delta > 0 && e.norm_gstar > 0) {
            xs.push_back(e.delta);
            ys.push_back(e.norm_gstar);
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    res.fitted_rate = nan;
    res.fitted_rate_structural = nan;
    if (xs.size() >= 2) {
        res.fitted_rate = fit_decay_rate(xs, ys);
        res.fitted_rate_structural = fit_decay_rate(xs, ys, res.leading_power);
    }
    if (!std::isfinite(res.leading_rate)) {
        res.leading_rate = 0.0;
    }
    return res;
}

} // namespace normflow
