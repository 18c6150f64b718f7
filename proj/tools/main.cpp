// Experiment runner for the tensor-network walker experiments.

#include "experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fstream>
#include <iostream>

using tnrl::cli::ConfigError;
using tnrl::cli::Experiment;
using tnrl::cli::ExperimentConfig;

namespace {

struct Flags {
    std::size_t T = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
    double alpha = 0.0;
    double epsilon = 0.0;
    std::size_t n_traj = 0;
    std::size_t epochs = 0;
    std::size_t n_sample = 0;
    std::string chi;
    std::string mode;
};

struct Command {
    Experiment experiment;
    CLI::App* app;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--T", f.T, "Horizon");
    app->add_option("--sigma", f.sigma, "Noise standard deviation (0 = deterministic)");
    app->add_option("--seed", f.seed, "RNG seed");
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--config", f.config, "JSON config file; flags override it");
}

ExperimentConfig build_config(const Command& cmd, const Flags& f) {
    ExperimentConfig cfg = tnrl::cli::default_config(cmd.experiment);
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("config", fmt::format("cannot read {}", f.config));
        tnrl::Json j;
        try {
            in >> j;
        } catch (const tnrl::Json::exception& e) {
            throw ConfigError("config", e.what());
        }
        tnrl::cli::apply_json(cfg, j);
    }
    auto given = [&](const char* name) {
        const auto* opt = cmd.app->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--T")) cfg.walker.horizon = f.T;
    if (given("--sigma")) cfg.walker.sigma = f.sigma;
    if (given("--seed")) cfg.walker.seed = f.seed;
    if (given("--out")) cfg.output_dir = f.out;
    if (given("--alpha")) cfg.plan.alpha = f.alpha;
    if (given("--epsilon")) cfg.plan.epsilon = f.epsilon;
    if (given("--n-traj")) cfg.plan.n_traj = f.n_traj;
    if (given("--epochs")) cfg.plan.n_epochs = f.epochs;
    if (given("--n-sample")) cfg.n_sample = f.n_sample;
    if (given("--chi")) cfg.chi_values = tnrl::cli::parse_chi(f.chi);
    if (given("--mode")) {
        if (f.mode == "joint") {
            cfg.marl_mode = tnrl::MarlMode::joint;
        } else if (f.mode == "per-agent") {
            cfg.marl_mode = tnrl::MarlMode::per_agent;
        } else {
            throw ConfigError("mode", fmt::format("unknown mode '{}'", f.mode));
        }
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor-network reinforcement learning experiments"};
    app.require_subcommand(1);
    Flags flags;
    std::vector<Command> commands;

    auto* sarl = app.add_subcommand("sarl-walk", "Single-agent walker: optimise and sample");
    add_common(sarl, flags);
    sarl->add_option("--n-sample", flags.n_sample, "Trajectories to sample");
    commands.push_back({Experiment::sarl_walk, sarl});

    auto* marl = app.add_subcommand("marl-walk", "Two-agent walker: optimise and sample");
    add_common(marl, flags);
    marl->add_option("--n-sample", flags.n_sample, "Trajectory pairs to sample");
    marl->add_option("--mode", flags.mode, "joint or per-agent");
    commands.push_back({Experiment::marl_walk, marl});

    auto* plan = app.add_subcommand("plan", "Model-based planning on the single-agent walker");
    add_common(plan, flags);
    plan->add_option("--alpha", flags.alpha, "Model learning rate");
    plan->add_option("--epsilon", flags.epsilon, "Exploration flip probability");
    plan->add_option("--n-traj", flags.n_traj, "Trajectories per epoch");
    plan->add_option("--epochs", flags.epochs, "Number of epochs");
    commands.push_back({Experiment::plan, plan});

    auto* scan = app.add_subcommand("svd-scan", "Reconstruction error of the joint transition tensor against chi");
    add_common(scan, flags);
    scan->add_option("--chi", flags.chi, "Bond lengths, a..b or a,b,c");
    commands.push_back({Experiment::svd_scan, scan});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& cmd : commands) {
            if (!cmd.app->parsed()) continue;
            const ExperimentConfig cfg = build_config(cmd, flags);
            const tnrl::Json summary = tnrl::cli::run_experiment(cfg);
            std::cout << summary.dump(2) << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 2;
    } catch (const tnrl::cli::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
