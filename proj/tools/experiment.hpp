#pragma once

#include "tnrl/environments.hpp"
#include "tnrl/io.hpp"
#include "tnrl/planner.hpp"
#include "tnrl/policy_optimizer.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tnrl::cli {

enum class Experiment { sarl_walk, marl_walk, plan, svd_scan };

[[nodiscard]] std::string experiment_name(Experiment e);
[[nodiscard]] std::optional<Experiment> parse_experiment(const std::string& name);

/// Bad configuration; `field` names the offending setting. Exit code 2.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Output could not be written. Exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::sarl_walk;
    WalkerConfig walker;
    PlanConfig plan;
    std::size_t n_sample = 100;
    std::filesystem::path output_dir = "out";
    std::vector<std::size_t> chi_values;  ///< svd-scan only; empty means 1..30
    MarlMode marl_mode = MarlMode::joint;

    /// Throws ConfigError naming the first invalid field.
    void check() const;
};

/// Default configuration of an experiment (T = 6 for the two-agent ones).
[[nodiscard]] ExperimentConfig default_config(Experiment e);

/// Applies the keys present in a JSON object: T, sigma, seed, out, alpha,
/// epsilon, n_traj, epochs, n_sample, chi, mode.
void apply_json(ExperimentConfig& cfg, const Json& j);

/// "a..b" (inclusive) or a comma-separated list.
[[nodiscard]] std::vector<std::size_t> parse_chi(const std::string& text);

[[nodiscard]] Json config_json(const ExperimentConfig& cfg);

/// Runs one experiment and writes its data files, summary.json and
/// manifest.json into cfg.output_dir. Returns the summary.
Json run_experiment(const ExperimentConfig& cfg);

} // namespace tnrl::cli
