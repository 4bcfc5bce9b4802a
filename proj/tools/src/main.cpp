#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "wulffflow/parallel.hpp"

using namespace wulffflow::cli;

int main(int argc, char** argv)
{
    CLI::App app{"wulffflow: anisotropic Allen-Cahn minimizing movements and diagnostics"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config, "run configuration (YAML)")->check(CLI::ExistingFile);
    app.add_option("--jobs", g.jobs, "concurrent sweep members")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output directory (overrides output_dir)");
    app.add_flag("--verbose", g.verbose, "per-step logging");

    auto* sim = app.add_subcommand("simulate", "run one trajectory per eps");
    auto* conv = app.add_subcommand("converge", "eps-refinement sweep with monotonicity check");
    auto* cal = app.add_subcommand("calibrate-check", "fit the calibration inequalities of the reference flow");
    auto* ani = app.add_subcommand("anisotropy-report", "identity table of the configured anisotropy");
    for (auto* s : {sim, conv, cal, ani}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (g.config.empty()) {
        fmt::print(stderr, "error: --config is required\n");
        return 2;
    }
    spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);
    spdlog::set_pattern("[%l] %v");
    spdlog::debug("internal threads: {}", wulffflow::num_threads());

    try {
        if (*sim) return cmd_simulate(g);
        if (*conv) return cmd_converge(g);
        if (*cal) return cmd_calibrate_check(g);
        return cmd_anisotropy_report(g);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e);
    }
}
