#include <CLI11.hpp>

#include "sharecap/commands.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace cli = sharecap::cli;

int main(int argc, char** argv) {
    CLI::App app{"Shared-capacity access network throughput modelling toolkit"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    if (const char* env = std::getenv("SHARECAP_OUT")) out_dir = env;

    std::string config_path, input_path, rate_table_path, manifest_path;
    std::string format;
    double growth = 0.0;
    int years = 0;
    long long seed = -1;
    std::vector<std::string> threshold_args;

    auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", out_dir, "Output directory (default $SHARECAP_OUT or '.')");
    };
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format, "Tabular output format: csv (default) or json");
    };

    auto* predict = app.add_subcommand("predict", "Closed-form per-class throughput prediction");
    predict->add_option("config", config_path, "Model config (JSON)")->required();
    add_out(predict);
    add_format(predict);

    auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation of the channel");
    simulate->add_option("config", config_path, "Simulation config (JSON)")->required();
    simulate->add_option("--seed", seed, "Override the config seed");
    add_out(simulate);

    auto* validate = app.add_subcommand("validate", "Model-vs-simulation sweep with speed-test probes");
    validate->add_option("sweep", config_path, "Sweep spec (JSON)")->required();
    validate->add_option("--seed", seed, "Override the sweep seed");
    add_out(validate);
    add_format(validate);

    auto* plan = app.add_subcommand("plan", "Classify areas against capacity thresholds");
    plan->add_option("areas", input_path, "Area records (CSV)")->required();
    plan->add_option("--growth", growth, "Annual traffic growth factor applied to rho");
    plan->add_option("--years", years, "Plan horizon in years");
    plan->add_option("--threshold", threshold_args,
                     "name:download_floor:upload_floor (repeatable; rates accept unit suffixes)");
    add_out(plan);
    add_format(plan);

    auto* infer = app.add_subcommand("infer-rho", "Infer utilization from speed-test samples");
    infer->add_option("samples", input_path, "Sample table (CSV)")->required();
    infer->add_option("--rate-table", rate_table_path, "MCS rate table (JSON)");
    add_out(infer);

    auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
    replay->add_option("manifest", manifest_path, "manifest.json from a previous run")->required();
    add_out(replay);

    CLI11_PARSE(app, argc, argv);

    return cli::guarded(
        [&]() -> int {
            if (predict->parsed()) {
                auto config = cli::load_json_file(config_path);
                if (!format.empty()) config["format"] = format;
                return cli::cmd_predict(config, out_dir, std::cerr);
            }
            if (simulate->parsed() || validate->parsed()) {
                auto config = cli::load_json_file(config_path);
                if (seed >= 0) config["seed"] = static_cast<std::uint64_t>(seed);
                if (!format.empty()) config["format"] = format;
                return simulate->parsed() ? cli::cmd_simulate(config, out_dir, std::cerr)
                                          : cli::cmd_validate(config, out_dir, std::cerr);
            }
            if (plan->parsed()) {
                nlohmann::json options;
                options["growth"] = growth;
                options["years"] = years;
                if (!format.empty()) options["format"] = format;
                if (!threshold_args.empty()) {
                    options["thresholds"] = nlohmann::json::array();
                    for (const auto& arg : threshold_args) {
                        const auto first = arg.find(':');
                        const auto second = arg.find(':', first + 1);
                        if (first == std::string::npos || second == std::string::npos) {
                            std::cerr << "bad --threshold '" << arg
                                      << "', expected name:down:up\n";
                            return cli::kExitInput;
                        }
                        options["thresholds"].push_back(
                            {{"name", arg.substr(0, first)},
                             {"download_floor", arg.substr(first + 1, second - first - 1)},
                             {"upload_floor", arg.substr(second + 1)}});
                    }
                }
                return cli::cmd_plan(input_path, options, out_dir, std::cerr);
            }
            if (infer->parsed()) {
                nlohmann::json options;
                if (!rate_table_path.empty())
                    options["rate_table"] = cli::load_json_file(rate_table_path);
                return cli::cmd_infer_rho(input_path, options, out_dir, std::cerr);
            }
            if (replay->parsed()) return cli::cmd_replay(manifest_path, out_dir, std::cerr);
            return cli::kExitInput;
        },
        std::cerr);
}
