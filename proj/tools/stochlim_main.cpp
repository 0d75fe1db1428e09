// stochlim: command-line front end
//
//   stochlim --config run.yaml [--mode m] [--threads N] [--output path] [--format csv|json]

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "stochlim/config.hpp"
#include "stochlim/errors.hpp"
#include "stochlim/runner.hpp"

int main(int argc, char** argv) {
    using namespace stochlim;

    CLI::App app{"Stochastic-limit decay kernels, survival amplitudes and limit checks"};
    app.set_version_flag("--version", std::string(version()));
    std::string config_path, mode, output, format;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    bool print_config = false;
    app.add_option("--config", config_path, "YAML run configuration")->required();
    app.add_option("--mode", mode, "override run.mode")
        ->check(CLI::IsMember({"rate", "curve", "sweep", "qcheck", "corrcheck"}));
    app.add_option("--threads", threads, "worker threads (default: available cores)")->check(CLI::PositiveNumber);
    app.add_option("--output", output, "output file (default: run.output, else standard output)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--print-config", print_config, "print the effective configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    RunConfig config;
    try {
        config = load_config(config_path);
        if (!mode.empty()) config.mode = *parse_mode(mode);
        if (!output.empty()) config.output = output;
        if (!format.empty()) config.format = *parse_format(format);
        config.validate();  // the mode override may need fields the file did not check
    } catch (const std::exception& e) {
        std::cerr << "stochlim: config: " << e.what() << '\n';
        return exit_code_for(std::current_exception());
    }

    if (print_config) {
        std::cout << emit_config(config);
        return kExitOk;
    }
    return run(config, threads, std::cout, std::cerr);
}
