#pragma once

#include "tnrl/tensor.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tnrl {

/// Raised when inputs to a model-level operation disagree on dimensions.
class DimensionMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dimensions and index maps of a finite-horizon MDP.
///
/// n_states, n_actions and n_rewards are per agent. Reward index k stands
/// for reward_values[k]; state index i stands for the semantic state
/// i + state_offset. Timesteps are 1-based: transition tensor t maps
/// (s_{t-1}, a_{t-1}) to (s_t, r_t).
struct FmdpSpec {
    std::size_t n_states = 1;
    std::size_t n_actions = 1;
    std::size_t n_rewards = 1;
    std::size_t horizon = 1;
    std::size_t n_agents = 1;
    std::vector<double> reward_values;
    int state_offset = 0;
    /// Semantic value of each action index; empty means the index itself.
    std::vector<int> action_values;

    [[nodiscard]] std::size_t joint_states() const;
    [[nodiscard]] std::size_t joint_actions() const;
    [[nodiscard]] std::size_t joint_rewards() const;
    [[nodiscard]] int action_value(std::size_t index) const;
    [[nodiscard]] int state_value(std::size_t index) const { return static_cast<int>(index) + state_offset; }

    /// Throws std::invalid_argument if dimensions are zero, reward values are
    /// not distinct or their count differs from n_rewards.
    void check() const;
};

/// Per-timestep transition tensors.
///
/// Single agent: rank 4, axes (s_t, r_t, s_{t-1}, a_{t-1}).
/// Two agents: rank 8, axes (s1_t, s2_t, r1_t, r2_t, s1_{t-1}, s2_{t-1}, a1_{t-1}, a2_{t-1}).
/// The leading half of the axes are outcomes, the trailing half conditions.
struct TransitionModel {
    std::vector<DenseTensor> tensors;

    [[nodiscard]] std::size_t horizon() const noexcept { return tensors.size(); }
    [[nodiscard]] const DenseTensor& at(std::size_t t) const;
};

enum class PolicyKind {
    single,    ///< π_t with axes (a, s)
    joint,     ///< πᴶ_t with axes (a1, a2, s1, s2)
    per_agent  ///< π⁽ⁱ⁾_t with axes (a_i, s1, s2), one per agent
};

/// Per-timestep policies; sites[t-1][k] is the tensor for timestep t and,
/// for per-agent policies, agent k (0-based). Other kinds hold one tensor
/// per timestep.
struct PolicySet {
    PolicyKind kind = PolicyKind::single;
    std::vector<std::vector<DenseTensor>> sites;

    [[nodiscard]] std::size_t horizon() const noexcept { return sites.size(); }
    [[nodiscard]] const DenseTensor& at(std::size_t t, std::size_t agent = 0) const;
    [[nodiscard]] DenseTensor& at(std::size_t t, std::size_t agent = 0);
    /// Number of leading action axes of each site tensor.
    [[nodiscard]] std::size_t action_axes() const noexcept;
};

struct InitialDistribution {
    /// Rank 1 (single agent) or rank 2 (s1, s2).
    DenseTensor p0;
};

/// One broken probability constraint.
struct Violation {
    std::string tensor;        ///< e.g. "transition[t=3]", "policy[t=2,agent=1]", "p0"
    Index conditioning_index;  ///< empty for unconditional distributions
    double observed_sum = 0.0;
    std::string message;
};

constexpr double kValidationTolerance = 1e-9;

/// Raised by require_valid; what() lists the first few violations.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(const std::string& what, std::vector<Violation> violations)
        : std::invalid_argument(what), violations_(std::move(violations)) {}
    [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Multidimensional identity: entry 1 iff all indices are equal.
[[nodiscard]] DenseTensor copy_tensor(std::size_t n, std::size_t rank);

/// Rank-1 tensor of ones.
[[nodiscard]] DenseTensor flat(std::size_t n);

[[nodiscard]] std::vector<Violation> validate(const TransitionModel& model);
[[nodiscard]] std::vector<Violation> validate(const PolicySet& policy);
[[nodiscard]] std::vector<Violation> validate(const InitialDistribution& p0);

/// Throw ValidationError when validate() reports anything.
void require_valid(const TransitionModel& model);
void require_valid(const PolicySet& policy);
void require_valid(const InitialDistribution& p0);

/// Checks a tensor whose leading `outcome_axes` axes form a distribution for
/// every index of the remaining axes.
[[nodiscard]] std::vector<Violation> validate_conditional(const DenseTensor& t,
                                                          std::size_t outcome_axes,
                                                          const std::string& name);

/// Checks that the model, policy and initial distribution have the shapes
/// the FmdpSpec implies. Throws DimensionMismatchError naming the tensor and axis.
void check_dimensions(const FmdpSpec& spec, const TransitionModel& model);
void check_dimensions(const FmdpSpec& spec, const PolicySet& policy);
void check_dimensions(const FmdpSpec& spec, const InitialDistribution& p0);

[[nodiscard]] Shape transition_shape(const FmdpSpec& spec);
[[nodiscard]] Shape policy_shape(const FmdpSpec& spec, PolicyKind kind);
[[nodiscard]] Shape initial_shape(const FmdpSpec& spec);

/// Policy with every action equally likely.
[[nodiscard]] PolicySet uniform_policy(const FmdpSpec& spec, PolicyKind kind);
/// Point mass on the given state index (all agents).
[[nodiscard]] InitialDistribution point_initial(const FmdpSpec& spec, std::size_t state);

/// Joint policy πᴶ_t(a1, a2, s1, s2) for any two-agent policy kind.
[[nodiscard]] DenseTensor joint_policy_site(const PolicySet& policy, std::size_t t);

} // namespace tnrl
