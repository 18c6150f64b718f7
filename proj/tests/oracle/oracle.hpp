#pragma once

// Brute-force references for tests. Nothing here calls the contraction
// engine or the optimiser; tensors are read element by element.

#include "tnrl/fmdp.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

namespace tnrl::oracle {

class InstanceTooLarge : public std::runtime_error {
public:
    InstanceTooLarge(const std::string& what, double count) : std::runtime_error(what), count_(count) {}
    [[nodiscard]] double count() const noexcept { return count_; }

private:
    double count_;
};

struct OracleResult {
    double expected_return = 0.0;
    double best_policy_return = 0.0;
    std::size_t n_terms = 0;
};

constexpr double kMaxTrajectories = 1e7;
constexpr double kMaxPolicies = 262144.0;  // 2^18

/// Σ over every trajectory (s0, a0, s1, r1, ..., sT, rT) of P(ω) G(ω).
/// n_terms is the number of enumerated trajectories, zero-probability ones
/// included: S (A S R)^T over grouped indices.
[[nodiscard]] OracleResult oracle_expected_return(const FmdpSpec& spec, const TransitionModel& model,
                                                  const PolicySet& policy, const InitialDistribution& p0);

/// Best deterministic policy by exhaustive search over A^(S T) policies.
/// Two-agent instances search deterministic joint policies.
[[nodiscard]] std::pair<PolicySet, OracleResult> oracle_optimal_policy(const FmdpSpec& spec,
                                                                       const TransitionModel& model,
                                                                       const InitialDistribution& p0);

/// Random valid instance. Transition tensors and p0 are drawn with a share
/// of exact zeros; policies have the requested kind.
struct RandomInstance {
    FmdpSpec spec;
    TransitionModel model;
    PolicySet policy;
    InitialDistribution p0;
};

[[nodiscard]] RandomInstance random_instance(std::mt19937_64& rng, std::size_t n_states, std::size_t n_actions,
                                             std::size_t n_rewards, std::size_t horizon, std::size_t n_agents = 1,
                                             PolicyKind kind = PolicyKind::single);

} // namespace tnrl::oracle
