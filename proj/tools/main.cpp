#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "convopt/errors.hpp"
#include "convopt/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Simulated multi-turn clarification tasks: logged-dataset generation, "
        "reward-weighted fine-tuning and baselines, exact bound checks, and "
        "evaluation reports"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir, algo, dataset_path;
    std::uint64_t seed = 0;
    int jobs = 0;
    bool print_config = false;
    app.add_option("--config", config_path, "JSON experiment config (defaults when omitted)");
    CLI::Option* seed_opt = app.add_option("--seed", seed, "Override master_seed");
    CLI::Option* out_opt = app.add_option("--out", out_dir, "Override output_dir");
    CLI::Option* jobs_opt = app.add_option("--jobs", jobs, "Override worker thread cap");
    app.add_flag("--print-effective-config", print_config,
                 "Print the effective config as canonical JSON and exit");

    CLI::App* datagen =
        app.add_subcommand("datagen", "Roll out the behavior policy into a logged dataset");
    CLI::App* train = app.add_subcommand("train", "Train one algorithm on the logged dataset");
    std::string algo_help = "One of: ";
    for (const char* name : convopt::kAlgoNames) {
        algo_help += algo_help.back() == ' ' ? name : std::string(", ") + name;
    }
    CLI::Option* algo_opt = train->add_option("--algo", algo, algo_help);
    train->add_option("--dataset", dataset_path,
                      "Dataset path (default: <output_dir>/dataset.jsonl)");
    CLI::App* eval =
        app.add_subcommand("eval", "Evaluate every checkpoint in the output directory");
    CLI::App* verify = app.add_subcommand(
        "verify-bounds", "Check the value bounds on a seeded grid of policies");
    CLI::App* report = app.add_subcommand("report", "Emit CSV and markdown comparison tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        convopt::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = convopt::load_config(config_path);
        if (seed_opt->count() > 0) cfg.master_seed = seed;
        if (out_opt->count() > 0) cfg.output_dir = out_dir;
        if (jobs_opt->count() > 0) cfg.jobs = jobs;
        cfg.validate();

        if (print_config) {
            std::cout << convopt::effective_config_json(cfg);
            return 0;
        }
        if (datagen->parsed()) return convopt::cmd_datagen(cfg);
        if (train->parsed()) {
            if (algo_opt->count() == 0) {
                throw convopt::validation_error("train: --algo is required (" + algo_help +
                                                ")");
            }
            return convopt::cmd_train(cfg, algo, dataset_path);
        }
        if (eval->parsed()) return convopt::cmd_eval(cfg);
        if (verify->parsed()) return convopt::cmd_verify_bounds(cfg);
        if (report->parsed()) return convopt::cmd_report(cfg);
        std::cerr << app.help();
        return 1;
    } catch (const convopt::validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const convopt::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const convopt::capability_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
