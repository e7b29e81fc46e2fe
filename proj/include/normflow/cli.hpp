#ifndef NORMFLOW_CLI_HPP
#define NORMFLOW_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <normflow/resonance.hpp>
#include <normflow/series.hpp>

namespace normflow::cli
{

enum class run_mode { flow, majorant_cert, low_order_pipeline, corank1_split };

run_mode parse_mode(const std::string &name);
std::string mode_name(run_mode m);

enum class report_format { csv, json, both };

// Parsed and validated experiment description. See docs/config.schema.json.
struct experiment_config {
    std::string name;
    frequency omega = frequency::exact({rational(1)});
    formal_series hamiltonian{1, 3};
    int truncation = 8;
    std::vector<double> delta_grid;
    run_mode mode = run_mode::flow;
    std::string out_dir = ".";
    report_format format = report_format::both;
    std::size_t threads = 0;

    double normal_form_threshold = 1e-10;
    double reality_tolerance = 1e-10;
    // Window and sample count for per-coefficient decay fits.
    double fit_lo = 2.0;
    double fit_hi = 6.0;
    int fit_points = 17;

    // majorant-cert: multiplier on the majorant initial data.
    double majorant_scale = 1.0;

    // low-order-pipeline
    std::optional<int> order;
    int horizon = 5;
    std::optional<double> c0;
    std::optional<double> alpha0;

    // corank1-split
    double split_rho = 1.0;
    double split_fit_lo = 1.0;
    double split_fit_hi = 6.0;
};

struct overrides {
    std::optional<std::string> out_dir;
    std::optional<int> truncation;
    std::optional<std::string> mode;
};

std::vector<std::string> preset_names();
// Raw preset document: {name, description, frequency, hamiltonian, expected_order}.
nlohmann::json preset(const std::string &name);

// Throws input_error on any schema problem.
experiment_config parse_config(const nlohmann::json &j, const overrides &ov = {});
experiment_config load_config(const std::string &path, const overrides &ov = {});

// Rectangular report table. Cells are JSON scalars (or integer arrays for
// exponent vectors); null stands for "not applicable".
struct table {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;
};

// %.17g
std::string format_double(double v);
// CSV rendering of one cell: numbers via format_double (integers verbatim),
// arrays space-separated, null empty, strings quoted when needed.
std::string format_cell(const nlohmann::json &cell);

std::string to_csv(const table &t);
nlohmann::json to_json(const table &t);

struct run_result {
    int exit_code = 0;
    nlohmann::json report;
    // Named tables; the first is the mode's main table.
    std::vector<std::pair<std::string, table>> tables;
    std::optional<nlohmann::json> witness;
};

// Runs one experiment without touching the file system.
run_result execute(const experiment_config &cfg);

// Writes <out>/<table>.csv, <out>/report.json and, on exit code 2,
// <out>/witness.json.
void emit_report(const run_result &res, const experiment_config &cfg);

// Full command: load, execute, emit. Exit code 0 on success, 1 on input or
// module errors, 2 when a bound or invariant check fails. One summary line
// goes to `out`, diagnostics to `err`.
int run(const std::string &config_path, const overrides &ov, std::ostream &out, std::ostream &err);

} // namespace normflow::cli

#endif
