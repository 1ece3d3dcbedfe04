// Command-line driver: spectral quantities, Cauchy-problem simulations,
// front diagnostics, action minimization, and aggregated pass/fail reports
// for the trait-structured dispersal model with a mortality trade-off.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "toadlab/commands.hpp"
#include "toadlab/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{std::string(toadlab::kVersion) +
                 " - trait-structured dispersal lab (spectra, fronts, action)"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string data_dir;
    bool plots = false;
    int jobs = 1;
    std::vector<std::string> sweep_configs;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config)
            sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (default: [output] dir)");
        sub->add_flag("--plots", plots, "emit SVG plots");
    };

    CLI::App* spectrum = app.add_subcommand("spectrum", "principal eigenvalue, Q, dispersion");
    add_common(spectrum);
    CLI::App* simulate = app.add_subcommand("simulate", "integrate the Cauchy problem");
    add_common(simulate);
    CLI::App* fronts = app.add_subcommand("fronts", "refit fronts from a run directory");
    add_common(fronts);
    fronts->add_option("--data", data_dir, "run directory with rho_*.csv")->required();
    CLI::App* action = app.add_subcommand("action", "minimize the path action");
    add_common(action);
    CLI::App* report = app.add_subcommand("report", "aggregated pass/fail table");
    add_common(report);
    CLI::App* sweep = app.add_subcommand("sweep", "simulate several configs");
    sweep->add_option("--config", sweep_configs, "configuration files")->required();
    sweep->add_option("--out", out_dir, "output root directory");
    sweep->add_option("--jobs", jobs, "parallel jobs");
    sweep->add_flag("--plots", plots, "emit SVG plots");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            return toadlab::cmd_sweep(sweep_configs, out_dir.empty() ? "sweep_out" : out_dir,
                                      jobs, plots);
        }
        const toadlab::RunConfig cfg = toadlab::load_config(config_path);
        const std::string dir = out_dir.empty() ? cfg.output.dir : out_dir;
        if (spectrum->parsed()) return toadlab::cmd_spectrum(cfg, dir);
        if (simulate->parsed()) return toadlab::cmd_simulate(cfg, dir, plots);
        if (fronts->parsed()) return toadlab::cmd_fronts(cfg, data_dir, dir);
        if (action->parsed()) return toadlab::cmd_action(cfg, dir);
        if (report->parsed()) return toadlab::cmd_report(cfg, dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
