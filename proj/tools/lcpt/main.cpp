#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "parallel.hpp"
#include "validate.hpp"

#ifndef LCPT_PRESET_DIR
#define LCPT_PRESET_DIR "presets"
#endif

namespace {

using namespace lcpt::cli;
namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;
constexpr int exit_degenerate = 3;

struct Globals
{
    std::string config;
    std::string out = ".";
    unsigned threads = default_threads();
    std::string units;
};

void emit(const Dataset& ds, const fs::path& dir)
{
    const fs::path path = dir / (ds.name + ".csv");
    ds.table.write(path);
    for (const auto& w : ds.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    std::cout << path.string() << '\n';
}

int run_preset(const fs::path& file, const Globals& g,
               std::optional<Units> units)
{
    const Preset preset = load_preset(file, units);
    const fs::path dir = fs::path(g.out) / preset.name;
    for (const auto& rc : preset.runs) {
        emit(run_command(rc, g.threads), dir);
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fluctuation statistics of light scattered by a driven "
                 "Lambda three-level atom"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--units", g.units, "rate units of config and output")
        ->check(CLI::IsMember({"scaled", "mhz"}));

    const std::vector<std::string> run_commands{"steady-scan", "spectrum", "chd",
                                                "squeezing", "variance-map"};
    const std::map<std::string, std::string> help{
        {"steady-scan", "steady-state populations over a parameter sweep"},
        {"spectrum", "incoherent and CHD spectra"},
        {"chd", "amplitude-intensity correlation h(tau) on both branches"},
        {"squeezing", "squeezing spectrum and quadrature variance"},
        {"variance-map", "quadrature variance over a 1- or 2-axis sweep"}};
    for (const auto& name : run_commands) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", g.config, "JSON config file (comments allowed)");
    }

    std::string figure;
    std::string preset_dir = LCPT_PRESET_DIR;
    auto* reproduce = app.add_subcommand("reproduce", "run figure presets");
    reproduce->add_option("figure", figure, "figN or all")->required();
    reproduce->add_option("--presets", preset_dir, "preset directory")
        ->capture_default_str();

    std::string fixture_path;
    auto* validate = app.add_subcommand("validate", "oracle cross-checks");
    validate->add_option("--write-fixture", fixture_path,
                         "also write oracle reference values to this file");

    // Global flags are accepted after the subcommand too.
    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : exit_config;
    }

    std::optional<Units> units;
    if (!g.units.empty()) {
        units = parse_units(g.units);
    }

    try {
        for (const auto& name : run_commands) {
            if (app.got_subcommand(name)) {
                const RunConfig rc = g.config.empty()
                                         ? default_run_config(name, units)
                                         : load_run_config(g.config, name, units);
                emit(run_command(rc, g.threads), g.out);
                return exit_ok;
            }
        }
        if (app.got_subcommand(reproduce)) {
            if (figure == "all") {
                const auto files = list_presets(preset_dir);
                if (files.empty()) {
                    throw config_error(preset_dir, "", std::nullopt,
                                       "no figN.json presets found");
                }
                for (const auto& f : files) {
                    run_preset(f, g, units);
                }
                return exit_ok;
            }
            const fs::path file = fs::path(preset_dir) / (figure + ".json");
            if (!fs::exists(file)) {
                throw config_error(file.string(), "", std::nullopt,
                                   "no such preset");
            }
            return run_preset(file, g, units);
        }
        if (app.got_subcommand(validate)) {
            const auto checks = run_validation(g.threads, &std::cout);
            bool ok = true;
            for (const auto& c : checks) {
                ok = ok && c.pass();
            }
            if (!fixture_path.empty()) {
                write_fixture(compute_fixture(g.threads), fixture_path);
                std::cout << "wrote " << fixture_path << '\n';
            }
            return ok ? exit_ok : exit_failure;
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const degeneracy_error& e) {
        std::cerr << "numerical degeneracy: " << e.what() << '\n';
        return exit_degenerate;
    } catch (const lcpt::error& e) {
        std::cerr << "numerical degeneracy: " << e.what() << '\n';
        return exit_degenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_ok;
}
