// Command-line front end: `dnl run` executes one experiment config, `dnl sweep` a list of them.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "dnl/cli.hpp"

namespace {

int do_run(const std::string& config, const std::string& out_flag) {
    using namespace dnl::cli;
    try {
        const ExperimentConfig cfg = load_config(config);
        const std::filesystem::path out = out_flag.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_flag);
        const ExperimentOutcome o = run_experiment(cfg, out);
        if (o.solver_failure) std::cerr << "dnl: solver failure: " << *o.solver_failure << '\n';
        std::cout << to_string(cfg.experiment) << ": " << (o.status() == exit_ok ? "passed" : "FAILED") << " -> "
                  << (out / "report.json").string() << '\n';
        return o.status();
    } catch (const dnl::ConfigError& e) {
        std::cerr << "dnl: " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "dnl: " << e.what() << '\n';
        return exit_solver_failure;
    }
}

int do_sweep(const std::string& config, const std::string& out_flag) {
    using namespace dnl::cli;
    try {
        const auto children = parse_sweep(config);
        const std::filesystem::path out = out_flag.empty() ? std::filesystem::path("sweep_out") : std::filesystem::path(out_flag);
        const int status = run_sweep(children, out);
        std::cout << "sweep: " << children.size() << " children, " << (status == exit_ok ? "all passed" : "some FAILED")
                  << " -> " << (out / "sweep.json").string() << '\n';
        return status;
    } catch (const dnl::ConfigError& e) {
        std::cerr << "dnl: " << e.what() << '\n';
        return exit_config_error;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dnl: experiments for doubly nonlinear parabolic equations"};
    app.require_subcommand(1);
    std::string config, out;
    auto* run = app.add_subcommand("run", "run one experiment config");
    run->add_option("--config", config, "INI experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory (default: output.dir of the config)");
    auto* sweep = app.add_subcommand("sweep", "run a sweep of configs");
    sweep->add_option("--config", config, "INI sweep config")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out, "output directory (default: sweep_out)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dnl::cli::exit_config_error;
    }
    if (run->parsed()) return do_run(config, out);
    return do_sweep(config, out);
}
