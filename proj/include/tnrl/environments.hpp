#pragma once

#include "tnrl/fmdp.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

namespace tnrl {

/// 1D random walker starting at state 0 with actions down (-1) and up (+1).
struct WalkerConfig {
    std::size_t horizon = 20;
    /// Standard deviation of the per-step noise; 0 means deterministic.
    double sigma = 0.0;
    std::size_t n_agents = 1;
    std::uint64_t seed = 0;

    void check() const;
};

/// Normal noise rounded onto {-1, 0, +1}.
struct NoiseDistribution {
    double down = 0.0;
    double stay = 1.0;
    double up = 0.0;
};

/// stay = P(-1 < X <= 1) for X ~ N(0, sigma^2); both tails get (1 - stay) / 2.
[[nodiscard]] NoiseDistribution discretize_normal(double sigma);

struct FmdpInstance {
    FmdpSpec spec;
    TransitionModel model;
    InitialDistribution p0;
};

/// Single-agent walker on states -T..T.
///
/// For t < T the reward is 0 when s_t >= 0 and -1 otherwise; at t = T it is
/// +1 when s_T = 0 and -10 otherwise. Next states are s + a + noise clamped
/// to [-T, T], with overshoot mass collected on the boundary.
[[nodiscard]] FmdpInstance build_sarl_walker(const WalkerConfig& cfg);

/// Two independent walkers with coupled rewards.
///
/// For t < T each agent loses 2 when s1 <= s2 and a further 1 when its own
/// state is negative; at t = T each gets +1 at state 0 and -10 elsewhere.
/// Noise is drawn independently per agent. Both start at 0.
[[nodiscard]] FmdpInstance build_marl_walker(const WalkerConfig& cfg);

/// One sampled episode. Outer vectors are per agent; semantic values are
/// stored alongside the indices used by the tensors.
struct TrajectoryRecord {
    std::vector<std::vector<int>> states;      ///< T+1 entries, from t = 0
    std::vector<std::vector<int>> actions;     ///< T entries, actions taken at t = 0..T-1
    std::vector<std::vector<double>> rewards;  ///< T entries, rewards r_1..r_T
    std::vector<std::vector<std::size_t>> state_index;
    std::vector<std::vector<std::size_t>> action_index;
    std::vector<std::vector<std::size_t>> reward_index;
    double total_return = 0.0;
    bool satisfied_objective = false;
};

using ObjectivePredicate = std::function<bool(const TrajectoryRecord&)>;

/// s_t >= 0 for 1 <= t < T and s_T = 0.
[[nodiscard]] bool sarl_walker_objective(const TrajectoryRecord& rec);
/// s1_t > s2_t >= 0 for 1 <= t < T and s1_T = s2_T = 0.
[[nodiscard]] bool marl_walker_objective(const TrajectoryRecord& rec);

/// Per-trajectory generator: std::mt19937_64 seeded with seed XOR index.
[[nodiscard]] std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index);
/// Uniform double in [0, 1) from the top 53 bits of one draw.
[[nodiscard]] double uniform01(std::mt19937_64& rng);

/// Samples episodes from the model under the policy.
///
/// Each step draws the (joint) action from the policy, then with probability
/// epsilon flips each agent's action independently (index a -> N_A-1-a),
/// then draws the outcome (s', r). The initial state is drawn from p0.
[[nodiscard]] std::vector<TrajectoryRecord> sample_trajectories(const FmdpSpec& spec,
                                                                const TransitionModel& model,
                                                                const PolicySet& policy,
                                                                const InitialDistribution& p0,
                                                                std::size_t n_traj, double epsilon,
                                                                std::uint64_t seed,
                                                                const ObjectivePredicate& objective = {});

/// Fraction of records with satisfied_objective set; 0 for an empty list.
[[nodiscard]] double objective_fraction(const std::vector<TrajectoryRecord>& records);

/// Mean state over all agents, records and timesteps t_first..t_last.
[[nodiscard]] double mean_state(const std::vector<TrajectoryRecord>& records, std::size_t t_first,
                                std::size_t t_last);

/// CSV with header traj_id,agent,t,s,a,r and one row per (trajectory, agent, t)
/// for t = 0..T. The action is empty at t = T and the reward empty at t = 0.
/// Agents are numbered from 1.
void write_trajectories_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records);

} // namespace tnrl
