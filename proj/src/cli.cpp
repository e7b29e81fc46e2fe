#include <normflow/cli.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <normflow/errors.hpp>
#include <normflow/fit.hpp>
#include <normflow/flow.hpp>
#include <normflow/majorant.hpp>
#include <normflow/scheduler.hpp>

#include "presets.hpp"

namespace normflow::cli
{

namespace
{

using nlohmann::json;

const std::vector<double> default_grid{0.0, 0.5, 1.0, 2.0, 5.0};

void require(bool ok, const std::string &what)
{
    if (!ok) {
        throw input_error("config: " + what);
    }
}

void check_keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed)
{
    require(obj.is_object(), where + " must be an object");
    for (const auto &item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char *a) { return item.key() == a; });
        require(known, "unknown key \"" + item.key() + "\" in " + where);
    }
}

double get_number(const json &obj, const char *key, double fallback)
{
    if (!obj.contains(key)) {
        return fallback;
    }
    require(obj.at(key).is_number(), std::string(key) + " must be a number");
    return obj.at(key).get<double>();
}

int get_int(const json &obj, const char *key, int fallback)
{
    if (!obj.contains(key)) {
        return fallback;
    }
    require(obj.at(key).is_number_integer(), std::string(key) + " must be an integer");
    return obj.at(key).get<int>();
}

int literal_max_degree(const json &lit)
{
    int d = 0;
    if (!lit.is_array()) {
        return d;
    }
    for (const auto &e : lit) {
        if (e.is_object() && e.contains("k") && e.contains("kbar") && e["k"].is_array() && e["kbar"].is_array()) {
            int s = 0;
            for (const auto &x : e["k"]) {
                s += x.is_number_integer() ? x.get<int>() : 0;
            }
            for (const auto &x : e["kbar"]) {
                s += x.is_number_integer() ? x.get<int>() : 0;
            }
            d = std::max(d, s);
        }
    }
    return d;
}

json index_vector(const std::vector<int> &v)
{
    return json(v);
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json witness_json(const std::string &module, const std::string &operation, const std::string &indices,
                  const std::string &detail)
{
    return {{"module", module}, {"operation", operation}, {"indices", indices}, {"detail", detail}};
}

flow_solution solve(const experiment_config &cfg)
{
    return flow_exact(cfg.hamiltonian, cfg.omega, cfg.truncation, {exp_poly::default_term_cap, cfg.threads});
}

// Largest |conj(H_k) - H_{k*}| over stored k and the grid, with its location.
struct reality_witness {
    double defect = 0.0;
    std::optional<multi_index> k;
    double delta = 0.0;
};

reality_witness locate_reality_defect(const flow_solution &sol, std::span<const double> grid)
{
    reality_witness w;
    for (const double d : grid) {
        for (const auto &[k, p] : sol.coefficients()) {
            const double e = std::abs(std::conj(sol.h_coeff(k, d)) - sol.h_coeff(k.star(), d));
            if (e > w.defect) {
                w = {e, k, d};
            }
        }
    }
    return w;
}

void run_flow(const experiment_config &cfg, run_result &res)
{
    const auto sol = solve(cfg);
    const auto nf = normal_form_limit(sol, cfg.normal_form_threshold);

    std::vector<double> fit_x;
    for (int i = 0; i < cfg.fit_points; ++i) {
        fit_x.push_back(cfg.fit_lo + (cfg.fit_hi - cfg.fit_lo) * i / (cfg.fit_points - 1));
    }

    table t;
    t.columns = {"k", "kbar", "deg", "divisor", "limit_re", "limit_im", "fitted_decay", "kprime", "resonant",
                 "leading_rate", "leading_power", "fitted_decay_structural"};
    for (const double d : cfg.delta_grid) {
        t.columns.push_back("abs_h@" + format_double(d));
    }

    std::size_t nonresonant = 0;
    double worst_margin = INFINITY;
    std::optional<multi_index> worst_k;
    for (const auto &[k, p] : sol.coefficients()) {
        const auto lead = leading_behaviour(sol, k);
        std::complex<double> lim{};
        json fitted = nullptr, fitted_s = nullptr;
        if (lead.resonant) {
            lim = ep_limit_infinity(p);
        } else if (!p.is_zero()) {
            ++nonresonant;
            std::vector<double> y;
            for (const double x : fit_x) {
                y.push_back(std::abs(sol.h_coeff(k, x)));
            }
            if (std::all_of(y.begin(), y.end(), [](double v) { return v > 0 && std::isfinite(v); })) {
                const double r = fit_decay_rate(fit_x, y);
                fitted = number_or_null(r);
                fitted_s = number_or_null(fit_decay_rate(fit_x, y, lead.leading_power));
                const double margin = r - lead.divisor.value;
                if (margin < worst_margin) {
                    worst_margin = margin;
                    worst_k = k;
                }
            }
        }
        std::vector<json> row{index_vector(k.k_vector()),
                              index_vector(k.kbar_vector()),
                              k.degree(),
                              lead.divisor.value,
                              lim.real(),
                              lim.imag(),
                              fitted,
                              index_vector(k.prime()),
                              lead.resonant ? 1 : 0,
                              number_or_null(lead.leading_rate),
                              lead.leading_power,
                              fitted_s};
        for (const double d : cfg.delta_grid) {
            row.emplace_back(std::abs(sol.h_coeff(k, d)));
        }
        t.rows.push_back(std::move(row));
    }

    const bool input_real = reality_defect(cfg.hamiltonian) == 0.0;
    const auto rw = locate_reality_defect(sol, cfg.delta_grid);

    res.report["summary"] = {
        {"order", nf.order ? json(*nf.order) : json(nullptr)},
        {"normal_form_threshold", cfg.normal_form_threshold},
        {"rows", t.rows.size()},
        {"nonresonant_rows", nonresonant},
        {"fit_window", {cfg.fit_lo, cfg.fit_hi}},
        {"worst_decay_margin", worst_k ? json(worst_margin) : json(nullptr)},
        {"worst_decay_index", worst_k ? json(worst_k->to_string()) : json(nullptr)},
        {"input_real", input_real},
        {"reality_defect", rw.defect},
        {"normal_form", to_json(nf.n_diamond)},
    };
    res.tables.emplace_back("flow", std::move(t));

    if (input_real && rw.defect > cfg.reality_tolerance) {
        res.exit_code = 2;
        res.witness = witness_json("flow", "check_reality", rw.k->to_string(),
                                   "defect " + format_double(rw.defect) + " at delta " + format_double(rw.delta));
    }
}

void run_majorant(const experiment_config &cfg, run_result &res)
{
    const auto sol = solve(cfg);
    // f_j = max over |k| = j of |H_k| / multinomial(k), so that H << f(zeta).
    std::vector<double> init(cfg.truncation + 1, 0.0);
    for (const auto &[k, c] : cfg.hamiltonian) {
        init[k.degree()] = std::max(init[k.degree()], std::abs(c) / multinomial(k));
    }
    for (auto &v : init) {
        v *= cfg.majorant_scale;
    }
    const zeta_flow zf(majorant_fn::series(init), cfg.omega.n(), cfg.truncation);
    const auto rep = verify_domination(sol, zf, cfg.delta_grid);

    table t;
    t.columns = {"k", "kbar", "deg", "delta", "exact", "majorant", "margin", "rounding"};
    double min_ratio = INFINITY;
    for (const auto &r : rep.rows) {
        t.rows.push_back({index_vector(r.k.k_vector()), index_vector(r.k.kbar_vector()), r.k.degree(), r.delta,
                          r.exact, r.majorant, r.margin, r.rounding});
        if (r.exact > r.rounding) {
            min_ratio = std::min(min_ratio, r.majorant / r.exact);
        }
    }
    res.report["summary"] = {
        {"initial_majorant", init},
        {"scale", cfg.majorant_scale},
        {"rows", rep.rows.size()},
        {"violations", rep.violations},
        {"initial_dominated", rep.initial_dominated},
        {"min_majorant_ratio", number_or_null(min_ratio)},
    };
    res.tables.emplace_back("domination", std::move(t));

    if (!rep.ok()) {
        const auto &w = *rep.witness;
        res.exit_code = 2;
        res.witness = witness_json("majorant", "verify_domination", w.k.to_string(),
                                   "|calH| " + format_double(w.exact) + " > majorant " + format_double(w.majorant)
                                       + " at delta " + format_double(w.delta));
    }
}

void run_pipeline(const experiment_config &cfg, run_result &res)
{
    const auto sol = solve(cfg);
    const auto nf = normal_form_limit(sol, cfg.normal_form_threshold);
    const int r = cfg.order.value_or(std::min(nf.order.value_or(cfg.truncation + 1), cfg.truncation + 1));
    require(r >= 3 && r <= cfg.truncation + 1, "pipeline.order must lie in [3, truncation + 1]");

    const auto n = cfg.omega.n();
    const auto a = make_a_sequence(cfg.omega, n, cfg.horizon);
    const auto bruno = bruno_check(a, cfg.horizon);
    const auto seq = b_from_a(a, cfg.horizon);
    const auto conv = convexity_inequalities(seq, seq.s_min(), seq.s_max());

    pipeline_constants pc;
    if (cfg.c0 && cfg.alpha0) {
        pc = {*cfg.alpha0, *cfg.c0};
    } else {
        pc = choose_pipeline_constants(cfg.hamiltonian, seq);
    }

    table seqs;
    seqs.columns = {"kind", "index", "value"};
    for (std::size_t j = 0; j < a.size(); ++j) {
        seqs.rows.push_back({"a", j, a[j]});
    }
    for (int s = seq.s_min(); s <= seq.s_max(); ++s) {
        seqs.rows.push_back({"b", s, seq.b(s)});
    }

    const auto out = normalize_low_orders(cfg.hamiltonian, cfg.omega, r, pc.c0, pc.alpha0, seq, cfg.truncation);

    table certs;
    certs.columns = {"m", "s", "alpha", "epsilon", "epsilon_closed", "lambda", "rho", "band_residual",
                     "rho_inequality"};
    for (const auto &c : out.certificates) {
        certs.rows.push_back({c.m, c.s, c.alpha, c.epsilon, c.epsilon_closed, c.lambda, c.rho, c.band_residual,
                              c.rho_inequality ? 1 : 0});
    }

    json resonant_match = nullptr;
    if (r <= cfg.truncation) {
        resonant_match = max_coeff_diff(project_sign_class(out.g.degree_range(r, r), cfg.omega, sign_class::zero),
                                        nf.n_diamond.degree_range(r, r));
    }

    res.report["summary"] = {
        {"order", r},
        {"steps", out.certificates.size()},
        {"horizon", cfg.horizon},
        {"tail_model", seq.tail_model()},
        {"bruno_partial_sum", bruno.partial_sum},
        {"bruno_evidence", bruno.evidence_yes},
        {"convexity_checked", conv.checked},
        {"convexity_ok", conv.ok()},
        {"alpha0", out.alpha0},
        {"c0", out.c0},
        {"epsilon0", out.epsilon0},
        {"epsilon0_squared", out.epsilon0_squared},
        {"epsilon_sum", out.epsilon_sum},
        {"rho0", out.rho0},
        {"rho_star", out.rho_star},
        {"residual_below_r", out.residual_below_r},
        {"relative_residual_below_r", out.relative_residual_below_r},
        {"epsilon_chain_ok", out.epsilon_chain_ok},
        {"epsilon_sum_ok", out.epsilon_sum_ok},
        {"rho_star_ok", out.rho_star_ok},
        {"residual_ok", out.residual_ok},
        {"degree_r_resonant_vs_flow", resonant_match},
        {"g", to_json(out.g)},
    };
    res.tables.emplace_back("certificates", std::move(certs));
    res.tables.emplace_back("sequences", std::move(seqs));

    auto fail = [&](const std::string &op, const std::string &indices, const std::string &detail) {
        if (!res.witness) {
            res.exit_code = 2;
            res.witness = witness_json("scheduler", op, indices, detail);
        }
    };
    if (!conv.ok()) {
        fail("convexity_inequalities", conv.witness.value_or(""), "convexity of b fails");
    }
    for (const auto &c : out.certificates) {
        if (c.epsilon > std::ldexp(1.0, -c.m - 2)) {
            fail("normalize_low_orders", "m=" + std::to_string(c.m),
                 "epsilon " + format_double(c.epsilon) + " > 2^{-m-2}");
        }
        if (!c.rho_inequality) {
            fail("normalize_low_orders", "m=" + std::to_string(c.m), "rho inequality fails");
        }
    }
    if (!out.epsilon_chain_ok) {
        fail("normalize_low_orders", "m=0", "epsilon0 " + format_double(out.epsilon0) + " > 1/8");
    }
    if (!out.epsilon_sum_ok) {
        fail("normalize_low_orders", "all steps", "sum of epsilon " + format_double(out.epsilon_sum) + " > 1/2");
    }
    if (!out.rho_star_ok) {
        fail("normalize_low_orders", "all steps", "rho* " + format_double(out.rho_star) + " < rho0 e^{-1/2}");
    }
    if (!out.residual_ok) {
        fail("normalize_low_orders", "|k| < " + std::to_string(r),
             "relative residual " + format_double(out.relative_residual_below_r));
    }
}

void run_split(const experiment_config &cfg, run_result &res)
{
    const auto data = corank1_decompose(cfg.omega);
    const auto sol = solve(cfg);
    const auto sp = corank1_split(sol, data, cfg.delta_grid, cfg.split_rho, cfg.split_fit_lo, cfg.split_fit_hi);

    table t;
    t.columns = {"delta", "norm_g0", "norm_gstar", "ratio", "bound"};
    for (const auto &e : sp.entries) {
        t.rows.push_back({e.delta, e.norm_g0, e.norm_gstar, number_or_null(e.ratio), e.bound});
    }
    res.report["summary"] = {
        {"q", data.q},
        {"p", data.p},
        {"lambda", data.lambda},
        {"lambda_over_p", sp.lambda_over_p},
        {"rho", sp.rho},
        {"leading_rate", sp.leading_rate},
        {"leading_power", sp.leading_power},
        {"fit_window", {sp.fit_lo, sp.fit_hi}},
        {"fitted_rate", number_or_null(sp.fitted_rate)},
        {"fitted_rate_structural", number_or_null(sp.fitted_rate_structural)},
        {"resonant_variation", sp.resonant_variation},
    };
    res.tables.emplace_back("split", std::move(t));
}

json config_echo(const experiment_config &cfg)
{
    return {{"name", cfg.name},
            {"mode", mode_name(cfg.mode)},
            {"n", cfg.omega.n()},
            {"frequency", to_json(cfg.omega)},
            {"truncation", cfg.truncation},
            {"delta_grid", cfg.delta_grid},
            {"hamiltonian", to_json(cfg.hamiltonian)}};
}

void write_text(const std::filesystem::path &p, const std::string &text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open " + p.string() + " for writing");
    }
    f << text;
    if (!f) {
        throw std::runtime_error("write failed for " + p.string());
    }
}

} // namespace

run_mode parse_mode(const std::string &name)
{
    if (name == "flow") {
        return run_mode::flow;
    }
    if (name == "majorant-cert") {
        return run_mode::majorant_cert;
    }
    if (name == "low-order-pipeline") {
        return run_mode::low_order_pipeline;
    }
    if (name == "corank1-split") {
        return run_mode::corank1_split;
    }
    throw input_error("unknown mode \"" + name
                      + "\" (expected flow, majorant-cert, low-order-pipeline or corank1-split)");
}

std::string mode_name(run_mode m)
{
    switch (m) {
    case run_mode::flow:
        return "flow";
    case run_mode::majorant_cert:
        return "majorant-cert";
    case run_mode::low_order_pipeline:
        return "low-order-pipeline";
    case run_mode::corank1_split:
        return "corank1-split";
    }
    return "flow";
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    for (std::size_t i = 0; i < detail::preset_count; ++i) {
        names.emplace_back(detail::preset_table[i].name);
    }
    return names;
}

nlohmann::json preset(const std::string &name)
{
    for (std::size_t i = 0; i < detail::preset_count; ++i) {
        if (name == detail::preset_table[i].name) {
            return json::parse(detail::preset_table[i].json);
        }
    }
    std::string known;
    for (const auto &n : preset_names()) {
        known += (known.empty() ? "" : ", ") + n;
    }
    throw input_error("unknown preset \"" + name + "\" (known: " + known + ")");
}

experiment_config parse_config(const nlohmann::json &j, const overrides &ov)
{
    check_keys(j, "config",
               {"$schema", "name", "frequency", "hamiltonian", "truncation", "delta_grid", "mode", "output",
                "thresholds", "fit", "threads", "majorant", "pipeline", "split"});
    experiment_config cfg;
    try {
        cfg.name = j.value("name", std::string{});

        // Hamiltonian: inline literal or {"preset": name}.
        require(j.contains("hamiltonian"), "missing \"hamiltonian\"");
        json literal;
        std::optional<json> preset_doc;
        const auto &hs = j.at("hamiltonian");
        if (hs.is_object()) {
            check_keys(hs, "hamiltonian", {"preset"});
            require(hs.contains("preset") && hs.at("preset").is_string(), "hamiltonian.preset must be a string");
            preset_doc = preset(hs.at("preset").get<std::string>());
            literal = preset_doc->at("hamiltonian");
            if (cfg.name.empty()) {
                cfg.name = hs.at("preset").get<std::string>();
            }
        } else {
            require(hs.is_array(), "hamiltonian must be a series literal array or {\"preset\": name}");
            literal = hs;
        }

        if (j.contains("frequency")) {
            cfg.omega = frequency_from_json(j.at("frequency"));
        } else {
            require(preset_doc.has_value(), "missing \"frequency\"");
            cfg.omega = frequency_from_json(preset_doc->at("frequency"));
        }

        cfg.truncation = get_int(j, "truncation", 8);
        if (ov.truncation) {
            cfg.truncation = *ov.truncation;
        }
        require(cfg.truncation >= 3, "truncation must be >= 3");

        const int parse_k = std::max(cfg.truncation, literal_max_degree(literal));
        cfg.hamiltonian = series_from_json(literal, cfg.omega.n(), parse_k).truncated(cfg.truncation);
        require(cfg.hamiltonian.empty() || cfg.hamiltonian.in_f_diamond(),
                "hamiltonian terms must have degree >= 3");

        if (j.contains("delta_grid")) {
            require(j.at("delta_grid").is_array(), "delta_grid must be an array");
            cfg.delta_grid = j.at("delta_grid").get<std::vector<double>>();
        } else {
            cfg.delta_grid = default_grid;
        }
        require(!cfg.delta_grid.empty(), "delta_grid must not be empty");
        for (std::size_t i = 0; i < cfg.delta_grid.size(); ++i) {
            require(std::isfinite(cfg.delta_grid[i]) && cfg.delta_grid[i] >= 0, "delta_grid must be nonnegative");
            require(i == 0 || cfg.delta_grid[i] > cfg.delta_grid[i - 1], "delta_grid must be strictly ascending");
        }

        if (ov.mode) {
            cfg.mode = parse_mode(*ov.mode);
        } else {
            require(j.contains("mode") && j.at("mode").is_string(), "missing \"mode\"");
            cfg.mode = parse_mode(j.at("mode").get<std::string>());
        }

        if (j.contains("output")) {
            const auto &o = j.at("output");
            check_keys(o, "output", {"dir", "format"});
            cfg.out_dir = o.value("dir", cfg.out_dir);
            const auto fmt = o.value("format", std::string("both"));
            require(fmt == "csv" || fmt == "json" || fmt == "both", "output.format must be csv, json or both");
            cfg.format = fmt == "csv" ? report_format::csv : fmt == "json" ? report_format::json : report_format::both;
        }
        if (ov.out_dir) {
            cfg.out_dir = *ov.out_dir;
        }

        if (j.contains("thresholds")) {
            const auto &t = j.at("thresholds");
            check_keys(t, "thresholds", {"normal_form", "reality"});
            cfg.normal_form_threshold = get_number(t, "normal_form", cfg.normal_form_threshold);
            cfg.reality_tolerance = get_number(t, "reality", cfg.reality_tolerance);
            require(cfg.normal_form_threshold >= 0 && cfg.reality_tolerance >= 0, "thresholds must be >= 0");
        }
        if (j.contains("fit")) {
            const auto &f = j.at("fit");
            check_keys(f, "fit", {"lo", "hi", "points"});
            cfg.fit_lo = get_number(f, "lo", cfg.fit_lo);
            cfg.fit_hi = get_number(f, "hi", cfg.fit_hi);
            cfg.fit_points = get_int(f, "points", cfg.fit_points);
        }
        require(cfg.fit_lo >= 0 && cfg.fit_hi > cfg.fit_lo && cfg.fit_points >= 2, "fit window must be valid");

        if (j.contains("threads")) {
            const int t = get_int(j, "threads", 0);
            require(t >= 0, "threads must be >= 0");
            cfg.threads = static_cast<std::size_t>(t);
        }
        if (j.contains("majorant")) {
            const auto &m = j.at("majorant");
            check_keys(m, "majorant", {"scale"});
            cfg.majorant_scale = get_number(m, "scale", 1.0);
            require(cfg.majorant_scale >= 0, "majorant.scale must be >= 0");
        }
        if (j.contains("pipeline")) {
            const auto &p = j.at("pipeline");
            check_keys(p, "pipeline", {"order", "horizon", "c0", "alpha0"});
            if (p.contains("order")) {
                cfg.order = get_int(p, "order", 0);
            }
            cfg.horizon = get_int(p, "horizon", cfg.horizon);
            require(cfg.horizon >= 1 && cfg.horizon <= 8, "pipeline.horizon must lie in [1, 8]");
            require(p.contains("c0") == p.contains("alpha0"), "pipeline.c0 and pipeline.alpha0 go together");
            if (p.contains("c0")) {
                cfg.c0 = get_number(p, "c0", 0.0);
                cfg.alpha0 = get_number(p, "alpha0", 0.0);
            }
        }
        if (j.contains("split")) {
            const auto &s = j.at("split");
            check_keys(s, "split", {"rho", "fit_lo", "fit_hi"});
            cfg.split_rho = get_number(s, "rho", cfg.split_rho);
            cfg.split_fit_lo = get_number(s, "fit_lo", cfg.split_fit_lo);
            cfg.split_fit_hi = get_number(s, "fit_hi", cfg.split_fit_hi);
            require(cfg.split_rho > 0 && cfg.split_fit_hi > cfg.split_fit_lo, "split parameters must be valid");
        }
    } catch (const nlohmann::json::exception &e) {
        throw input_error(std::string("config: ") + e.what());
    }
    return cfg;
}

experiment_config load_config(const std::string &path, const overrides &ov)
{
    std::ifstream f(path);
    if (!f) {
        throw input_error("cannot open config file " + path);
    }
    json j;
    try {
        j = json::parse(f);
    } catch (const nlohmann::json::parse_error &e) {
        throw input_error(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j, ov);
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_cell(const nlohmann::json &cell)
{
    if (cell.is_null()) {
        return "";
    }
    if (cell.is_number_float()) {
        return format_double(cell.get<double>());
    }
    if (cell.is_number()) {
        return cell.dump();
    }
    if (cell.is_boolean()) {
        return cell.get<bool>() ? "1" : "0";
    }
    if (cell.is_array()) {
        std::string s;
        for (const auto &x : cell) {
            s += (s.empty() ? "" : " ") + format_cell(x);
        }
        return s;
    }
    const auto s = cell.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (const char c : s) {
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return q + "\"";
}

std::string to_csv(const table &t)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        os << (i ? "," : "") << format_cell(t.columns[i]);
    }
    os << '\n';
    for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << format_cell(row[i]);
        }
        os << '\n';
    }
    return os.str();
}

nlohmann::json to_json(const table &t)
{
    return {{"columns", t.columns}, {"rows", t.rows}};
}

run_result execute(const experiment_config &cfg)
{
    run_result res;
    res.report = {{"format", "normflow-report"}, {"version", 1}, {"config", config_echo(cfg)}};
    try {
        switch (cfg.mode) {
        case run_mode::flow:
            run_flow(cfg, res);
            break;
        case run_mode::majorant_cert:
            run_majorant(cfg, res);
            break;
        case run_mode::low_order_pipeline:
            run_pipeline(cfg, res);
            break;
        case run_mode::corank1_split:
            run_split(cfg, res);
            break;
        }
    } catch (const bound_violation &e) {
        res.exit_code = 2;
        res.witness = witness_json(e.module(), e.operation(), e.witness(), e.what());
    }
    auto tables = json::object();
    for (const auto &[name, t] : res.tables) {
        tables[name] = to_json(t);
    }
    res.report["tables"] = tables;
    res.report["exit_code"] = res.exit_code;
    if (res.witness) {
        res.report["witness"] = *res.witness;
    }
    return res;
}

void emit_report(const run_result &res, const experiment_config &cfg)
{
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    if (cfg.format != report_format::json) {
        for (const auto &[name, t] : res.tables) {
            write_text(dir / (name + ".csv"), to_csv(t));
        }
    }
    if (cfg.format != report_format::csv) {
        write_text(dir / "report.json", res.report.dump(2) + "\n");
    }
    const auto witness = dir / "witness.json";
    if (res.witness) {
        write_text(witness, res.witness->dump(2) + "\n");
    } else {
        fs::remove(witness);
    }
}

int run(const std::string &config_path, const overrides &ov, std::ostream &out, std::ostream &err)
{
    experiment_config cfg;
    try {
        cfg = load_config(config_path, ov);
    } catch (const std::exception &e) {
        err << "normflow: " << e.what() << '\n';
        return 1;
    }
    try {
        const auto res = execute(cfg);
        emit_report(res, cfg);
        out << mode_name(cfg.mode) << ": exit " << res.exit_code;
        for (const auto &[name, t] : res.tables) {
            out << ", " << name << " " << t.rows.size() << " rows";
        }
        out << ", reports in " << cfg.out_dir << '\n';
        if (res.witness) {
            err << "normflow: " << res.witness->at("module").get<std::string>() << "::"
                << res.witness->at("operation").get<std::string>() << " failed at "
                << res.witness->at("indices").get<std::string>() << '\n';
        }
        return res.exit_code;
    } catch (const std::exception &e) {
        err << "normflow: " << e.what() << '\n';
        return 1;
    }
}

} // namespace normflow::cli
