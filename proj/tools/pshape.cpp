// pshape: command-line front end. Options are folded into the key = value
// config map (file first, then --set, then the dedicated flags).

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "pshape/cli.hpp"

int main(int argc, char** argv) {
    using pshape::cli::ConfigMap;

    CLI::App app{"p-Laplacian shape optimisation toolkit"};
    app.footer(pshape::cli::usage());
    std::string command;
    std::string config_path;
    std::vector<std::string> sets;
    std::vector<std::string> inputs;
    std::string out_dir;
    double m = 0.0, p = 0.0;
    app.add_option("command", command, "command to run (default: the config's command key)");
    app.add_option("inputs", inputs, "input files (gamma-distance: MU.csv NU.csv)");
    app.add_option("-c,--config", config_path, "run config file (key = value lines)");
    app.add_option("-s,--set", sets, "override one config key, key=value")->take_all();
    app.add_option("-o,--out", out_dir, "output directory");
    auto* m_opt = app.add_option("--m", m, "volume budget / lens area");
    auto* p_opt = app.add_option("--p", p, "exponent p");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "pshape: " << e.what() << "\n" << pshape::cli::usage();
        return 2;
    }

    ConfigMap config;
    try {
        if (!config_path.empty()) config = pshape::cli::parse_config_text(pshape::io::read_file(config_path));
        std::string text;
        for (const auto& s : sets) text += s + "\n";
        config = pshape::cli::parse_config_text(text, std::move(config));
    } catch (const std::exception& e) {
        std::cerr << "pshape: " << e.what() << "\n";
        return 2;
    }
    if (!command.empty()) config["command"] = command;
    command = config.count("command") ? config["command"] : "";
    if (!out_dir.empty()) config["output.dir"] = out_dir;
    if (*m_opt) config["m"] = pshape::io::format_real(m);
    if (*p_opt) config["p"] = pshape::io::format_real(p);
    if (command == "gamma-distance") {
        if (inputs.size() != 2) {
            std::cerr << "pshape: gamma-distance takes exactly two measure CSVs\n" << pshape::cli::usage();
            return 2;
        }
        config["gamma.mu"] = inputs[0];
        config["gamma.nu"] = inputs[1];
    } else if (!inputs.empty()) {
        std::cerr << "pshape: unexpected positional arguments for " << command << "\n" << pshape::cli::usage();
        return 2;
    }
    return pshape::cli::run(config);
}
