// Command-line front end: gou --config run.json [--command ...] [--dry-run]

#include "gou/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

enum Exit { kOk = 0, kTolerance = 1, kConfig = 2, kIo = 3 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Series solver and Monte Carlo validation for the generalized Ornstein-Uhlenbeck elliptic problem"};
    std::string config_path, command, output, format;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool dry_run = false;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--command", command, "solve | verify | simulate | convexity (overrides the config)");
    app.add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
    app.add_option("--output", output, "Output file (default: stdout)");
    app.add_option("--format", format, "csv | json");
    app.add_option("--workers", workers, "Worker threads; 0 = all cores");
    app.add_flag("--dry-run", dry_run, "Print the resolved plan and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    gou::RunConfig cfg;
    try {
        cfg = gou::load_run_config(config_path);
        if (!command.empty()) cfg.command = gou::parse_command(command);
        if (seed) cfg.mc.seed = *seed;
        if (workers) {
            if (*workers < 0) throw gou::ConfigError("--workers: must be >= 0");
            cfg.mc.workers = cfg.probe.workers = *workers;
        }
        if (!output.empty()) cfg.output_path = output;
        if (!format.empty()) cfg.format = gou::parse_format(format);
        if (cfg.command == gou::Command::simulate && cfg.experiment.name.empty()) {
            throw gou::ConfigError("experiment.name: required for simulate");
        }
        if (dry_run) {
            std::cout << gou::describe(cfg);
            return kOk;
        }
    } catch (const gou::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    }

    gou::RunOutput out;
    try {
        out = gou::run(cfg);
    } catch (const gou::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const gou::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kTolerance;
    }

    if (cfg.output_path.empty()) {
        std::cout << out.text;
    } else {
        std::ofstream f(cfg.output_path, std::ios::binary);
        if (!f || !(f << out.text) || !f.flush()) {
            std::cerr << "error: cannot write '" << cfg.output_path << "'\n";
            return kIo;
        }
    }
    if (!out.ok) {
        std::cerr << "assertion failure: see the \"passed\" fields of the output\n";
        return kTolerance;
    }
    return kOk;
}
