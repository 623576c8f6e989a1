#include "qfc/config.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Quantum frequency conversion simulator"};
    app.set_version_flag("--version", std::string(qfc::tool_version));
    app.require_subcommand(1);

    std::string config_path;
    qfc::RunOptions options;
    const std::pair<const char*, const char*> commands[] = {
        {"sweep", "Efficiency sweep over the interaction strength"},
        {"schmidt", "Schmidt-spectrum sweep over the interaction strength"},
        {"cascade", "Cascaded devices at fixed total strength"},
        {"design", "Pump duration for a separable (mu = 0) device"},
        {"oracle-check", "Cross-validation of the numerical paths"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", options.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--threads", options.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", options.seed, "Reserved; no stochastic components");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qfc::exit_config;
    }
    const std::string subcommand = app.get_subcommands().front()->get_name();
    return qfc::run_file(config_path, subcommand, options, std::cout, std::cerr);
}
