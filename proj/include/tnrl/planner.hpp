#pragma once

#include "tnrl/environments.hpp"
#include "tnrl/fmdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace tnrl {

struct PlanConfig {
    double alpha = 0.4;    ///< learning rate of the model update
    double epsilon = 0.2;  ///< action-flip probability while sampling
    std::size_t n_traj = 30;
    std::size_t n_epochs = 10;
    std::uint64_t seed = 0;

    void check() const;
};

struct EpochLog {
    std::size_t epoch = 0;
    double e_return_model = 0.0;  ///< expected return under the learned model
    double e_return_true = 0.0;   ///< expected return under the true model
};

/// Every entry 1 / (N_S N_R) in the grouped view.
[[nodiscard]] TransitionModel init_uniform_model(const FmdpSpec& spec);

/// Moves each visited (s, a) slice towards the empirical outcome frequencies.
///
/// Transitions into timesteps 1..T-1 are pooled and update all of those
/// tensors alike; transitions into T update the last tensor only. For every
/// visited (s, a): entry += alpha (fraction - entry) over all (s', r).
/// Unvisited slices are left untouched.
[[nodiscard]] TransitionModel update_model(const FmdpSpec& spec, const TransitionModel& model,
                                           const std::vector<TrajectoryRecord>& trajectories, double alpha);

struct PlanResult {
    std::vector<EpochLog> log;  ///< epoch 0 is the state before any learning
    TransitionModel model;
    PolicySet policy;
};

/// Sampling seed of one epoch; trajectories inside it use seed XOR index.
[[nodiscard]] std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch);

/// Model-based loop for a single-agent FMDP.
///
/// Starts from the uniform model and uniform policy. Each epoch samples
/// n_traj episodes from the true model with epsilon exploration, updates the
/// learned model, re-optimises the current policy against it with one
/// backward sweep and logs the pure policy's return under both models.
[[nodiscard]] PlanResult plan(const FmdpSpec& spec, const TransitionModel& true_model,
                              const InitialDistribution& p0, const PlanConfig& cfg);

/// CSV with header epoch,e_model,e_true.
void write_plan_csv(std::ostream& out, const std::vector<EpochLog>& log);

} // namespace tnrl
