#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <normflow/cli.hpp>

int main(int argc, char **argv)
{
    CLI::App app{"Continuous-averaging normal forms: flow runs, majorant certificates, low-order pipeline."};
    app.require_subcommand(1);

    std::string config;
    normflow::cli::overrides ov;
    std::string out_dir, mode;
    int k = 0;

    auto *run = app.add_subcommand("run", "Run the experiment described by a JSON config");
    run->add_option("config", config, "Config file (see docs/config.schema.json)")->required();
    auto *out_opt = run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    auto *k_opt = run->add_option("--k", k, "Truncation degree K (overrides truncation)")->check(CLI::Range(3, 64));
    auto *mode_opt = run->add_option("--mode", mode, "Run mode")->check(
        CLI::IsMember({"flow", "majorant-cert", "low-order-pipeline", "corank1-split"}));

    auto *presets = app.add_subcommand("presets", "List the built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (presets->parsed()) {
        for (const auto &name : normflow::cli::preset_names()) {
            std::cout << name << '\n';
        }
        return 0;
    }

    if (*out_opt) {
        ov.out_dir = out_dir;
    }
    if (*k_opt) {
        ov.truncation = k;
    }
    if (*mode_opt) {
        ov.mode = mode;
    }
    return normflow::cli::run(config, ov, std::cout, std::cerr);
}
