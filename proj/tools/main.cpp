// vortexdyn command line: run/validate experiment configs, emit presets.

#include <CLI11.hpp>

#include <iostream>

#include "vortexdyn/experiment.hpp"
#include "vortexdyn/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"vortexdyn: point-vortex dynamics in R^{2m} and a 2D torus vorticity solver"};
    app.set_version_flag("--version", std::string(vortexdyn::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "path to a JSON experiment config")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config and print its resolved form");
    validate->add_option("config", validate_path, "path to a JSON experiment config")->required();

    std::string preset_name;
    bool emit_config = false;
    auto* preset_cmd = app.add_subcommand("preset", "run a named preset experiment");
    preset_cmd->add_option("name", preset_name, "preset name (see --list)")->required();
    preset_cmd->add_flag("--emit-config", emit_config, "print the preset config instead of running");

    auto* list_cmd = app.add_subcommand("presets", "list the preset catalog");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return vortexdyn::run_experiment_file(config_path, std::cout);
        if (validate->parsed()) return vortexdyn::validate_config_file(validate_path, std::cout);
        if (list_cmd->parsed()) {
            for (const auto& n : vortexdyn::preset_names()) std::cout << n << "\n";
            return 0;
        }
        if (preset_cmd->parsed()) {
            const auto cfg = vortexdyn::preset(preset_name);
            if (emit_config) {
                std::cout << cfg.resolved().dump(2) << "\n";
                return 0;
            }
            return vortexdyn::run_experiment(cfg, std::cout);
        }
    } catch (const vortexdyn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return vortexdyn::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return vortexdyn::kExitRuntimeFailure;
    }
    return 0;
}
