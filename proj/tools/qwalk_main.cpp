#include "qwalk/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using qwalk::cli::RunConfig;

// Applies values from the JSON config file for every key the command line
// did not set explicitly.
void apply_config_file(const std::string& path, RunConfig& config, const CLI::App* cmd) {
    std::ifstream in(path);
    if (!in) throw qwalk::DomainError("cannot open config file " + path);
    nlohmann::json file;
    try {
        in >> file;
    } catch (const nlohmann::json::exception& e) {
        throw qwalk::DomainError("config file " + path + ": " + e.what());
    }

    const auto overridden = [&](const std::string& flag) {
        const CLI::Option* opt = cmd->get_option_no_throw("--" + flag);
        return opt != nullptr && opt->count() > 0;
    };
    const auto load = [&](const char* key, auto& field) {
        if (file.contains(key) && !overridden(key)) field = file.at(key).get<std::decay_t<decltype(field)>>();
    };

    try {
        load("size", config.size);
        load("dims", config.dims);
        load("gamma", config.gamma);
        load("epsilon", config.epsilon);
        if (file.contains("t_max") && !overridden("t-max"))
            config.t_max = file.at("t_max").get<double>();
        load("dt", config.dt);
        load("backend", config.backend);
        load("path", config.path);
        load("regime", config.regime);
        load("start", config.start);
        load("output", config.output);
        if (file.contains("sizes") && !overridden("size"))
            config.sizes = file.at("sizes").get<std::vector<int>>();
        if (file.contains("dims_list") && !overridden("dims"))
            config.dims_list = file.at("dims_list").get<std::vector<int>>();
        if (file.contains("gammas") && !overridden("gamma"))
            config.gammas = file.at("gammas").get<std::vector<double>>();
        if (file.contains("epsilons") && !overridden("epsilon"))
            config.epsilons = file.at("epsilons").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw qwalk::DomainError("config file " + path + ": " + e.what());
    }
}

void add_common_flags(CLI::App* cmd, RunConfig& config, std::string& config_path) {
    cmd->add_option("--size", config.size, "Cycle size N (>= 2)");
    cmd->add_option("--dims", config.dims, "Hyper-cycle dimension n (>= 1)");
    cmd->add_option("--gamma", config.gamma, "Decoherence rate");
    cmd->add_option("--start", config.start, "Initial vertex as base-N digits, e.g. 000");
    cmd->add_option("--output", config.output,
                    "Output prefix; writes <prefix>.csv and <prefix>.json");
    cmd->add_option("--config", config_path, "JSON config file; flags override its values");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decoherent continuous-time quantum walks on cycles and hyper-cycles"};
    app.require_subcommand(1);

    RunConfig config;
    std::string config_path;

    CLI::App* simulate = app.add_subcommand("simulate", "Vertex probabilities over a time grid");
    add_common_flags(simulate, config, config_path);
    simulate->add_option("--t-max", config.t_max, "End of the time grid");
    simulate->add_option("--dt", config.dt, "Grid step");
    simulate->add_option("--backend", config.backend, "exact | ode | auto (dims = 1)");
    simulate->add_option("--path", config.path, "factored | full | auto (dims >= 2)");

    CLI::App* mixing = app.add_subcommand("mixing", "Mixing times and the TV series");
    add_common_flags(mixing, config, config_path);
    mixing->add_option("--epsilon", config.epsilon, "Mixing threshold");
    mixing->add_option("--t-max", config.t_max, "Horizon (default 5x the regime bound)");
    mixing->add_option("--dt", config.dt, "Scan step (default bound/2000)");
    mixing->add_option("--regime", config.regime, "weak | strong (selects the reported bound)");

    CLI::App* bounds = app.add_subcommand("bounds", "Analytic bound table over a grid");
    bounds->add_option("--size", config.sizes, "Cycle sizes (comma separated)")
        ->delimiter(',');
    bounds->add_option("--dims", config.dims_list, "Dimensions (comma separated)")
        ->delimiter(',');
    bounds->add_option("--gamma", config.gammas, "Decoherence rates (comma separated)")
        ->delimiter(',');
    bounds->add_option("--epsilon", config.epsilons, "Thresholds (comma separated)")
        ->delimiter(',');
    bounds->add_option("--regime", config.regime, "weak | strong (default: both)");
    bounds->add_option("--output", config.output,
                       "Output prefix; writes <prefix>.csv and <prefix>.json");
    bounds->add_option("--config", config_path, "JSON config file");

    CLI::App* compare = app.add_subcommand("compare",
                                           "Analytic-kernel vs numeric-path residuals");
    add_common_flags(compare, config, config_path);
    compare->add_option("--t-max", config.t_max, "End of the time grid");
    compare->add_option("--dt", config.dt, "Grid step");
    compare->add_option("--regime", config.regime, "weak | strong (required)");

    CLI::App* sweep = app.add_subcommand("sweep", "Measured mixing time vs gamma");
    sweep->add_option("--size", config.size, "Cycle size N");
    sweep->add_option("--dims", config.dims, "Hyper-cycle dimension n");
    sweep->add_option("--gamma", config.gammas, "Gamma list (comma separated)")
        ->delimiter(',');
    sweep->add_option("--epsilon", config.epsilon, "Mixing threshold");
    sweep->add_option("--t-max", config.t_max, "Horizon override");
    sweep->add_option("--dt", config.dt, "Scan step override");
    sweep->add_option("--start", config.start, "Initial vertex digits");
    sweep->add_option("--output", config.output, "Output prefix");
    sweep->add_option("--config", config_path, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    CLI::App* active = app.get_subcommands().front();
    config.command = active->get_name();
    if (!config_path.empty()) {
        try {
            apply_config_file(config_path, config, active);
        } catch (const qwalk::DomainError& e) {
            std::cerr << "qwalk: " << e.what() << "\n";
            return 1;
        }
    }
    return qwalk::cli::run_command(config);
}
