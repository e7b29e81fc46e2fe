#include <normflow/flow.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>

#include <normflow/errors.hpp>

namespace normflow
{

divisor_table::divisor_table(const frequency &omega, std::size_t n, int max_degree)
{
    if (omega.n() != n) {
        throw dimension_error("frequency dimension does not match series");
    }
    for (int d = 0; d <= max_degree; ++d) {
        for (const auto &k : indices_of_degree(n, d)) {
            m_table.emplace(k, sigma_omega(omega, k.prime()));
        }
    }
}

const sign_divisor &divisor_table::operator()(const multi_index &k) const
{
    const auto it = m_table.find(k);
    if (it == m_table.end()) {
        throw domain_error("divisor table: index " + k.to_string() + " beyond precomputed degree");
    }
    return it->second;
}

rate divisor_table::pair_rate(const multi_index &l, const multi_index &m, const multi_index &k) const
{
    return (*this)(l).divisor + (*this)(m).divisor - (*this)(k).divisor;
}

namespace
{

// Calls visit(l) for every l <= top componentwise, in lexicographic order.
template <typename F>
void for_each_sub_index(const multi_index &top, F &&visit)
{
    const std::size_t slots = 2 * top.n();
    multi_index l(top.n());
    while (true) {
        visit(l);
        std::size_t i = slots;
        while (i > 0) {
            --i;
            if (l.exponent(i) < top.exponent(i)) {
                l.set_exponent(i, l.exponent(i) + 1);
                break;
            }
            l.set_exponent(i, 0);
            if (i == 0) {
                return;
            }
        }
        if (slots == 0) {
            return;
        }
    }
}

int bracket_weight(const multi_index &l, const multi_index &m, std::size_t j)
{
    return l.kbar(j) * m.k(j) - l.k(j) * m.kbar(j);
}

} // namespace

std::vector<rhs_term> rhs_terms(const multi_index &k, const index_set &support, const divisor_table &divisors)
{
    std::vector<rhs_term> out;
    const std::size_t n = k.n();
    const int sk = divisors(k).sign;
    for (std::size_t j = 0; j < n; ++j) {
        const multi_index top = k + multi_index::unit_pair(n, j);
        for_each_sub_index(top, [&](const multi_index &l) {
            if (support.count(l) == 0) {
                return;
            }
            multi_index m;
            top.try_subtract(l, m);
            if (support.count(m) == 0) {
                return;
            }
            if (l.degree() >= k.degree() || m.degree() >= k.degree()) {
                throw error("rhs_terms: partner of " + k.to_string() + " is not of lower degree");
            }
            const int w = bracket_weight(l, m, j);
            if (w == 0) {
                return;
            }
            const int sl = divisors(l).sign;
            const int sm = divisors(m).sign;
            if (sm == 0 && sk != 0) {
                out.push_back({l, m, j, static_cast<double>(-sk * w), rate::zero(), true});
            } else if (sl < 0 && sm > 0) {
                const rate nu = divisors.pair_rate(l, m, k);
                if (compare(nu, rate::zero()) <= 0) {
                    throw error("rhs_terms: nonpositive pair rate for " + l.to_string() + " + " + m.to_string());
                }
                out.push_back({l, m, j, static_cast<double>(2 * w), nu, false});
            }
        });
    }
    return out;
}

std::size_t resolve_thread_count(std::size_t requested)
{
    std::size_t t = requested;
    if (t == 0) {
        t = std::max(1u, std::thread::hardware_concurrency());
    }
    if (const char *env = std::getenv("NORMFLOW_THREADS")) {
        char *end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) {
            t = std::min(t, static_cast<std::size_t>(cap));
        }
    }
    return std::max<std::size_t>(t, 1);
}

flow_solution::flow_solution(frequency omega, formal_series initial, int K)
    : m_omega(std::move(omega)), m_initial(std::move(initial)), m_K(K),
      m_divisors(m_omega, m_initial.n(), K)
{
}

const exp_poly &flow_solution::calH(const multi_index &k) const
{
    static const exp_poly zero;
    const auto it = m_calH.find(k);
    return it == m_calH.end() ? zero : it->second;
}

std::complex<double> flow_solution::h_coeff(const multi_index &k, double delta) const
{
    const auto it = m_calH.find(k);
    if (it == m_calH.end()) {
        return {};
    }
    return ep_eval(it->second, delta) * std::exp(-m_divisors(k).divisor.value * delta);
}

formal_series flow_solution::calH_series(double delta) const
{
    formal_series s(m_initial.n(), m_K);
    for (const auto &[k, p] : m_calH) {
        s.set(k, ep_eval(p, delta));
    }
    return s;
}

formal_series flow_solution::h_series(double delta) const
{
    formal_series s(m_initial.n(), m_K);
    for (const auto &[k, p] : m_calH) {
        s.set(k, ep_eval(p, delta) * std::exp(-m_divisors(k).divisor.value * delta));
    }
    return s;
}

flow_solution flow_exact(const formal_series &h, const frequency &omega, int K, const flow_options &opts)
{
    if (omega.n() != h.n()) {
        throw dimension_error("flow_exact: frequency dimension does not match series");
    }
    if (!h.in_f_diamond()) {
        throw domain_error("flow_exact: initial series has terms of degree < 3");
    }
    if (K < 3) {
        throw domain_error("flow_exact: truncation degree must be at least 3");
    }
    omega.audit(2 * K + 2);
    flow_solution sol(omega, h.truncated(K), K);
    const std::size_t n = h.n();
    const std::size_t threads = resolve_thread_count(opts.threads);

    index_set support;
    for (int d = 3; d <= K; ++d) {
        const auto candidates = indices_of_degree(n, d);
        std::vector<exp_poly> results(candidates.size());

        auto solve_one = [&](std::size_t idx) {
            const multi_index &k = candidates[idx];
            std::vector<exp_term> integrand;
            for (const auto &t : rhs_terms(k, support, sol.m_divisors)) {
                for (const auto &x : sol.m_calH.at(t.l).terms()) {
                    for (const auto &y : sol.m_calH.at(t.m).terms()) {
                        integrand.push_back({x.power + y.power, x.nu + y.nu + t.nu, t.weight * x.c * y.c});
                    }
                }
            }
            exp_poly value(sol.m_initial.coeff(k));
            if (!integrand.empty()) {
                const auto a = exp_poly::from_terms(std::move(integrand), std::numeric_limits<std::size_t>::max());
                value = ep_add(value, ep_integrate(a, opts.term_cap), opts.term_cap);
            }
            results[idx] = std::move(value);
        };

        if (threads <= 1 || candidates.size() < 2) {
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                solve_one(i);
            }
        } else {
            std::atomic<std::size_t> next{0};
            std::exception_ptr failure;
            std::mutex failure_mutex;
            std::vector<std::thread> pool;
            const std::size_t workers = std::min(threads, candidates.size());
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < candidates.size(); i = next++) {
                        try {
                            solve_one(i);
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) {
                                failure = std::current_exception();
                            }
                            next = candidates.size();
                        }
                    }
                });
            }
            for (auto &t : pool) {
                t.join();
            }
            if (failure) {
                std::rethrow_exception(failure);
            }
        }

        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (!results[i].is_zero()) {
                support.insert(candidates[i]);
                sol.m_calH.emplace(candidates[i], std::move(results[i]));
            }
        }
    }
    return sol;
}

namespace
{

struct numeric_entry {
    std::size_t k, l, m, rate;
    double coef;
};

} // namespace

std::map<double, formal_series> flow_numeric(const formal_series &h, const frequency &omega, int K,
                                             std::span<const double> delta_grid, double step)
{
    if (!(step > 0)) {
        throw domain_error("flow_numeric: step must be positive");
    }
    if (omega.n() != h.n()) {
        throw dimension_error("flow_numeric: frequency dimension does not match series");
    }
    if (!h.in_f_diamond()) {
        throw domain_error("flow_numeric: initial series has terms of degree < 3");
    }
    const std::size_t n = h.n();
    const divisor_table div(omega, n, K);
    const formal_series h0 = h.truncated(K);

    // Raw expansion of -{xi_* H, H}: for every ordered pair (l, m) and j,
    // d/d delta H_k += -sigma_{l'} (lbar_j m_j - l_j mbar_j) H_l H_m with
    // k = l + m - e_j. In the calH gauge this picks up
    // e^{(omega_{k'} - omega_{l'} - omega_{m'}) delta}.
    std::vector<std::vector<multi_index>> by_degree(K + 1);
    std::map<multi_index, std::size_t> slot;
    auto add_index = [&](const multi_index &k) {
        if (slot.emplace(k, 0).second) {
            by_degree[k.degree()].push_back(k);
        }
    };
    for (const auto &[k, c] : h0) {
        add_index(k);
    }

    struct raw_entry {
        multi_index k, l, m;
        double coef;
        double exponent;
    };
    std::vector<raw_entry> raw;
    for (int d = 4; d <= K; ++d) {
        for (int dl = 3; dl + 3 <= d + 2; ++dl) {
            const int dm = d + 2 - dl;
            if (dm >= d || dl >= d) {
                continue;
            }
            for (const auto &l : by_degree[dl]) {
                const int sl = div(l).sign;
                if (sl == 0) {
                    continue;
                }
                for (const auto &m : by_degree[dm]) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const int w = bracket_weight(l, m, j);
                        if (w == 0) {
                            continue;
                        }
                        multi_index k;
                        (l + m).try_subtract(multi_index::unit_pair(n, j), k);
                        const double ex = div(k).divisor.value - div(l).divisor.value - div(m).divisor.value;
                        raw.push_back({k, l, m, static_cast<double>(-sl * w), ex});
                    }
                }
            }
        }
        for (const auto &e : raw) {
            if (e.k.degree() == d) {
                add_index(e.k);
            }
        }
    }

    std::size_t next_slot = 0;
    for (auto &[k, s] : slot) {
        s = next_slot++;
    }
    std::vector<multi_index> index_of(slot.size());
    for (const auto &[k, s] : slot) {
        index_of[s] = k;
    }

    std::map<double, std::size_t> rate_slot;
    for (const auto &e : raw) {
        rate_slot.emplace(e.exponent, 0);
    }
    std::vector<double> rates;
    for (auto &[r, s] : rate_slot) {
        s = rates.size();
        rates.push_back(r);
    }
    // Terms H_l H_m and H_m H_l are the same monomial in the coefficients;
    // merge them (same-sign pairs cancel here).
    std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, double> merged;
    for (const auto &e : raw) {
        std::size_t l = slot.at(e.l), m = slot.at(e.m);
        if (m < l) {
            std::swap(l, m);
        }
        merged[{slot.at(e.k), l, m, rate_slot.at(e.exponent)}] += e.coef;
    }
    std::vector<numeric_entry> entries;
    entries.reserve(merged.size());
    for (const auto &[key, coef] : merged) {
        if (coef != 0.0) {
            const auto [k, l, m, r] = key;
            entries.push_back({k, l, m, r, coef});
        }
    }

    using state = std::vector<std::complex<double>>;
    state y(slot.size());
    for (const auto &[k, c] : h0) {
        y[slot.at(k)] = c;
    }
    std::vector<double> factors(rates.size());
    auto rhs = [&](double t, const state &u, state &du) {
        for (std::size_t i = 0; i < rates.size(); ++i) {
            factors[i] = std::exp(rates[i] * t);
        }
        std::fill(du.begin(), du.end(), std::complex<double>{});
        for (const auto &e : entries) {
            du[e.k] += e.coef * factors[e.rate] * u[e.l] * u[e.m];
        }
    };

    auto snapshot = [&](const state &u) {
        formal_series s(n, K);
        for (std::size_t i = 0; i < u.size(); ++i) {
            s.set(index_of[i], u[i]);
        }
        return s;
    };

    std::vector<double> grid(delta_grid.begin(), delta_grid.end());
    std::sort(grid.begin(), grid.end());
    std::map<double, formal_series> out;
    state k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    double t = 0.0;
    for (const double target : grid) {
        if (target < 0) {
            throw domain_error("flow_numeric: delta grid must be nonnegative");
        }
        if (target > t) {
            const auto steps = static_cast<std::size_t>(std::ceil((target - t) / step - 1e-12));
            const double hstep = (target - t) / static_cast<double>(steps);
            for (std::size_t s = 0; s < steps; ++s) {
                const double t0 = t + hstep * static_cast<double>(s);
                rhs(t0, y, k1);
                for (std::size_t i = 0; i < y.size(); ++i) {
                    tmp[i] = y[i] + 0.5 * hstep * k1[i];
                }
                rhs(t0 + 0.5 * hstep, tmp, k2);
                for (std::size_t i = 0; i < y.size(); ++i) {
                    tmp[i] = y[i] + 0.5 * hstep * k2[i];
                }
                rhs(t0 + 0.5 * hstep, tmp, k3);
                for (std::size_t i = 0; i < y.size(); ++i) {
                    tmp[i] = y[i] + hstep * k3[i];
                }
                rhs(t0 + hstep, tmp, k4);
                for (std::size_t i = 0; i < y.size(); ++i) {
                    y[i] += hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            t = target;
        }
        out.emplace(target, snapshot(y));
    }
    return out;
}

formal_series to_h_gauge(const formal_series &calH, const frequency &omega, double delta)
{
    formal_series s(calH.n(), calH.truncation());
    for (const auto &[k, c] : calH) {
        s.set(k, c * std::exp(-sigma_omega(omega, k.prime()).divisor.value * delta));
    }
    return s;
}

decay_row leading_behaviour(const flow_solution &sol, const multi_index &k)
{
    const auto &sd = sol.divisors()(k);
    decay_row row{k, sd.divisor, sd.sign == 0, std::numeric_limits<double>::infinity(), 0};
    const auto &p = sol.calH(k);
    if (p.is_zero()) {
        return row;
    }
    // Terms are sorted by nu, then power: the slowest rate comes first.
    const auto &terms = p.terms();
    const rate slowest = terms.front().nu;
    row.leading_rate = slowest.value + sd.divisor.value;
    for (const auto &t : terms) {
        if (!same_rate(t.nu, slowest)) {
            break;
        }
        row.leading_power = std::max(row.leading_power, t.power);
    }
    return row;
}

normal_form_result normal_form_limit(const flow_solution &sol, double threshold)
{
    normal_form_result res{formal_series(sol.initial().n(), sol.truncation()), std::nullopt, threshold, {}};
    for (const auto &[k, p] : sol.coefficients()) {
        const auto &sd = sol.divisors()(k);
        if (sd.sign == 0) {
            std::complex<double> lim;
            try {
                lim = ep_limit_infinity(p);
            } catch (const no_limit_error &e) {
                throw error("normal_form_limit: resonant coefficient " + k.to_string()
                            + " has no limit: " + e.what());
            }
            res.n_diamond.set(k, lim);
            if (std::abs(lim) > threshold && (!res.order || k.degree() < *res.order)) {
                res.order = k.degree();
            }
        } else if (!(sd.divisor.value > 0)) {
            throw error("normal_form_limit: nonresonant coefficient " + k.to_string() + " without decay");
        }
        res.residuals.push_back(leading_behaviour(sol, k));
    }
    return res;
}

namespace
{

formal_series lie_transform(const formal_series &f, const formal_series &chi)
{
    formal_series result = f;
    formal_series term = f;
    for (int j = 1; !term.empty(); ++j) {
        term = series_scale(poisson_bracket(term, chi), 1.0 / j);
        result = series_add(result, term);
    }
    return result;
}

formal_series homological_step(const formal_series &h, const formal_series &h2, const frequency &omega, int degree)
{
    formal_series chi(h.n(), h.truncation());
    const std::complex<double> i_unit(0.0, 1.0);
    for (const auto &[k, c] : h) {
        if (k.degree() != degree) {
            continue;
        }
        const auto sd = sigma_omega(omega, k.prime());
        if (sd.sign == 0) {
            continue;
        }
        const double divisor = sd.sign * sd.divisor.value;
        if (divisor == 0.0) {
            throw domain_error("birkhoff: zero divisor for nonresonant " + k.to_string());
        }
        chi.set(k, c / (i_unit * divisor));
    }
    if (chi.empty()) {
        return h;
    }
    return series_sub(lie_transform(series_add(h2, h), chi), h2);
}

} // namespace

formal_series birkhoff_step(const formal_series &h, const frequency &omega, int degree, int K)
{
    if (omega.n() != h.n()) {
        throw dimension_error("birkhoff_step: frequency dimension does not match series");
    }
    return homological_step(h.truncated(K), quadratic_part(omega, K), omega, degree);
}

formal_series birkhoff_oracle(const formal_series &h, const frequency &omega, int up_to_degree)
{
    if (omega.n() != h.n()) {
        throw dimension_error("birkhoff_oracle: frequency dimension does not match series");
    }
    if (!h.in_f_diamond()) {
        throw domain_error("birkhoff_oracle: initial series has terms of degree < 3");
    }
    const formal_series h2 = quadratic_part(omega, up_to_degree);
    formal_series cur = h.truncated(up_to_degree);
    for (int d = 3; d <= up_to_degree; ++d) {
        cur = homological_step(cur, h2, omega, d);
    }
    return project_sign_class(cur, omega, sign_class::zero);
}

double reality_defect(const flow_solution &sol, std::span<const double> delta_samples)
{
    double worst = 0.0;
    for (const double d : delta_samples) {
        worst = std::max(worst, reality_defect(sol.h_series(d)));
    }
    return worst;
}

bool check_reality(const flow_solution &sol, std::span<const double> delta_samples, double tol)
{
    return reality_defect(sol, delta_samples) <= tol;
}

} // namespace normflow
