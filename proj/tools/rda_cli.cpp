// Batch driver for the delayed reaction-diffusion-advection toolkit.
//
// Usage:  rda <eigen|steady|hopf|normal-form|simulate|sweep|validate>
//             [--config FILE] [--out DIR] [--plot] [--threads N] [--verbose]
//
// Exit codes: 0 ok, 2 configuration error, 3 solver nonconvergence,
// 4 invariant violation reported by `validate`.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rda/rda.hpp"

int main(int argc, char** argv) {
    CLI::App app{"delayed reaction-diffusion-advection bifurcation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    rda::RunOptions opt;
    bool out_set = false;

    const char* commands[] = {"eigen",    "steady", "hopf", "normal-form",
                              "simulate", "sweep",  "validate"};
    for (const char* name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        auto* c = sub->add_option("--config", config_path, "run configuration file");
        if (std::string(name) != "validate") c->required();
        sub->add_option("--out", out_dir, "output directory")
            ->each([&](const std::string&) { out_set = true; });
        sub->add_flag("--plot", opt.plot, "emit SVG line plots");
        sub->add_option("--threads", opt.threads, "worker threads for sweeps");
        sub->add_flag("--verbose", opt.verbose, "print per-stage diagnostics");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        rda::RunConfig cfg;
        if (!config_path.empty()) {
            cfg = rda::load_config(config_path);
            opt.out_dir = cfg.out_dir;
        }
        if (out_set) opt.out_dir = out_dir;

        if (command == "eigen") {
            rda::run_eigen(cfg, opt);
        } else if (command == "steady") {
            rda::run_steady(cfg, opt);
        } else if (command == "hopf") {
            rda::run_hopf(cfg, opt);
        } else if (command == "normal-form") {
            rda::run_normal_form(cfg, opt);
        } else if (command == "simulate") {
            rda::run_simulate(cfg, opt);
        } else if (command == "sweep") {
            rda::run_sweep(cfg, opt);
        } else if (command == "validate") {
            return rda::run_validate(opt) ? 0 : 4;
        }
        return 0;
    } catch (const rda::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
