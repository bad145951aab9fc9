#include "gdm/cli.hpp"
#include "gdm/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Gradient-scheme solver for coupled Navier-Stokes/heat flow on polygonal meshes"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Execute a convergence study or a single run from a config file");
    run->add_option("config", config_path, "Path to the key = value run configuration")->required();
    run->add_option("--out", out_dir, "Output directory (overrides 'output' in the config)");
    run->add_flag("--quiet", quiet, "Suppress progress output");

    CLI11_PARSE(app, argc, argv);

    gdm::cli::RunConfig config;
    try {
        config = gdm::cli::parse_config(config_path);
    } catch (const gdm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return gdm::cli::exit_config;
    }

    gdm::cli::RunOptions options;
    if (!out_dir.empty())
        options.output_dir = out_dir;
    options.quiet = quiet;
    options.threads = gdm::cli::threads_from_environment();
    return gdm::cli::run(config, options, quiet ? std::cerr : std::cout);
}
