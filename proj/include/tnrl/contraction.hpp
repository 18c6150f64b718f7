#pragma once

#include "tnrl/fmdp.hpp"
#include "tnrl/return_mpo.hpp"
#include "tnrl/tensor.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace tnrl {

/// The network contracted around one policy site.
///
/// z has the axes of the policy site it pairs with: (a, s) single agent,
/// (a1, a2, s1, s2) joint, or (a_i, s1, s2) for one agent of a per-agent
/// policy. Contracting z with that site over all axes gives the expected
/// return. Entries are reach-probability weighted.
struct EnvironmentTensor {
    DenseTensor z;
    std::size_t timestep = 1;
    std::optional<std::size_t> agent;
};

/// Evaluates the expected-return network of one FMDP by boundary sweeps.
///
/// Multi-agent tensors are handled through their grouped view: joint state
/// S = (s1, s2), joint reward R = (r1, r2), joint action A = (a1, a2). The
/// axis order of the joint tensors makes this a pure reinterpretation of the
/// row-major data. Boundaries are rank-2 tensors (S, bond); the left
/// boundary L_t covers timesteps 1..t-1, the right boundary R_t covers t..T.
///
/// Holds references to the model and initial distribution; they must
/// outlive the network.
class ReturnNetwork {
public:
    /// Uses the (fused) snake reward chain built from spec.reward_values.
    ReturnNetwork(const FmdpSpec& spec, const TransitionModel& model, const InitialDistribution& p0);
    ReturnNetwork(const FmdpSpec& spec, const TransitionModel& model, const InitialDistribution& p0,
                  ReturnMpo mpo);

    [[nodiscard]] const FmdpSpec& spec() const noexcept { return *spec_; }
    [[nodiscard]] const ReturnMpo& mpo() const noexcept { return mpo_; }

    /// L_1: the initial distribution with a length-1 bond.
    [[nodiscard]] DenseTensor initial_left() const;
    /// R_{T+1}: flat over states with a length-1 bond.
    [[nodiscard]] DenseTensor terminal_right() const;

    /// L_{t+1} from L_t and the grouped policy site π_t(A, S).
    [[nodiscard]] DenseTensor advance_left(const DenseTensor& left, const DenseTensor& policy_site,
                                           std::size_t t) const;
    /// V_t(S, A, bond): everything from timestep t onwards except π_t.
    [[nodiscard]] DenseTensor action_values(const DenseTensor& right_next, std::size_t t) const;
    /// R_t from V_t and π_t.
    [[nodiscard]] DenseTensor retreat_right(const DenseTensor& action_values,
                                            const DenseTensor& policy_site) const;
    /// Z_t(A, S) = Σ_bond L_t(S, bond) V_t(S, A, bond).
    [[nodiscard]] DenseTensor environment(const DenseTensor& left, const DenseTensor& action_values) const;

    /// L_1 .. L_{T+1} for the given policy.
    [[nodiscard]] std::vector<DenseTensor> left_boundaries(const PolicySet& policy) const;

    /// Left-to-right sweep.
    [[nodiscard]] double expected_return(const PolicySet& policy) const;
    /// Right-to-left sweep.
    [[nodiscard]] double expected_return_reverse(const PolicySet& policy) const;

    /// Grouped environment tensor Z_t(A, S) computed from scratch.
    [[nodiscard]] DenseTensor joint_environment(const PolicySet& policy, std::size_t t) const;

private:
    void check_timestep(std::size_t t) const;

    const FmdpSpec* spec_;
    const TransitionModel* model_;
    const InitialDistribution* p0_;
    ReturnMpo mpo_;
    std::vector<DenseTensor> sites_;  // bond form (bond_in, bond_out, R)
    std::size_t states_;
    std::size_t actions_;
    std::size_t rewards_;
};

/// E(G_{1:T}) of the whole network.
[[nodiscard]] double expected_return(const FmdpSpec& spec, const TransitionModel& model,
                                     const PolicySet& policy, const InitialDistribution& p0);

/// Contraction of the probability-only network (rewards marginalised by flats).
[[nodiscard]] double total_probability(const FmdpSpec& spec, const TransitionModel& model,
                                       const PolicySet& policy, const InitialDistribution& p0);

/// Environment tensor for the policy site at timestep t (1-based). For a
/// per-agent policy `agent` (0-based) selects the site; otherwise it must be
/// empty.
[[nodiscard]] EnvironmentTensor environment_tensor(const FmdpSpec& spec, const TransitionModel& model,
                                                   const PolicySet& policy, const InitialDistribution& p0,
                                                   std::size_t t,
                                                   std::optional<std::size_t> agent = std::nullopt);

/// Reduces a grouped joint environment Z(a1, a2, s1, s2) to agent `agent`'s
/// site by contracting the other agent's policy π(a_other, s1, s2).
[[nodiscard]] DenseTensor agent_environment(const DenseTensor& joint_z, const DenseTensor& other_policy,
                                            std::size_t agent, std::size_t n_actions, std::size_t n_states);

} // namespace tnrl
