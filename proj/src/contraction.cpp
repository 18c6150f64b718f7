#include "tnrl/contraction.hpp"

#include <fmt/format.h>
#include <stdexcept>

namespace tnrl {

ReturnNetwork::ReturnNetwork(const FmdpSpec& spec, const TransitionModel& model,
                             const InitialDistribution& p0)
    : ReturnNetwork(spec, model, p0,
                    fuse_per_timestep(build_snake_mpo(spec.horizon, spec.n_agents, spec.reward_values))) {}

ReturnNetwork::ReturnNetwork(const FmdpSpec& spec, const TransitionModel& model,
                             const InitialDistribution& p0, ReturnMpo mpo)
    : spec_(&spec), model_(&model), p0_(&p0), mpo_(std::move(mpo)), states_(spec.joint_states()),
      actions_(spec.joint_actions()), rewards_(spec.joint_rewards()) {
    spec.check();
    check_dimensions(spec, model);
    check_dimensions(spec, p0);
    if (!mpo_.fused && mpo_.n_agents > 1) mpo_ = fuse_per_timestep(mpo_);
    if (mpo_.size() != spec.horizon) {
        throw DimensionMismatchError(
            fmt::format("reward chain has {} sites for horizon {}", mpo_.size(), spec.horizon));
    }
    for (std::size_t k = 0; k < mpo_.size(); ++k) {
        sites_.push_back(mpo_.bond_form(k));
        if (sites_.back().shape()[2] != rewards_) {
            throw DimensionMismatchError(fmt::format("reward chain site {} has reward axis of length {}, "
                                                     "expected {}",
                                                     k + 1, sites_.back().shape()[2], rewards_));
        }
    }
}

void ReturnNetwork::check_timestep(std::size_t t) const {
    if (t < 1 || t > spec_->horizon) {
        throw std::out_of_range(fmt::format("timestep {} outside 1..{}", t, spec_->horizon));
    }
}

DenseTensor ReturnNetwork::initial_left() const {
    return DenseTensor(Shape{states_, 1}, std::vector<double>(p0_->p0.data().begin(), p0_->p0.data().end()));
}

DenseTensor ReturnNetwork::terminal_right() const { return DenseTensor(Shape{states_, 1}, 1.0); }

DenseTensor ReturnNetwork::advance_left(const DenseTensor& left, const DenseTensor& policy_site,
                                        std::size_t t) const {
    check_timestep(t);
    const std::size_t S = states_;
    const std::size_t A = actions_;
    const std::size_t R = rewards_;
    const DenseTensor& w = sites_[t - 1];
    const std::size_t b_in = w.shape()[0];
    const std::size_t b_out = w.shape()[1];
    if (left.size() != S * b_in || policy_site.size() != A * S) {
        throw DimensionMismatchError(fmt::format("boundary/policy sizes {}/{} do not fit timestep {}",
                                                 left.size(), policy_site.size(), t));
    }
    const auto L = left.data();
    const auto pi = policy_site.data();
    const auto M = model_->at(t).data();
    const auto W = w.data();

    // X(S, A, b) = L(S, b) π(A, S): the copy tensor on s_{t-1}.
    std::vector<double> X(S * A * b_in);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double p = pi[a * S + s];
            for (std::size_t b = 0; b < b_in; ++b) X[(s * A + a) * b_in + b] = L[s * b_in + b] * p;
        }
    }
    // Y(S', R, b) = Σ_{S, A} M(S', R, S, A) X(S, A, b)
    const std::size_t SA = S * A;
    std::vector<double> Y(S * R * b_in, 0.0);
    for (std::size_t row = 0; row < S * R; ++row) {
        const double* m = M.data() + row * SA;
        double* y = Y.data() + row * b_in;
        for (std::size_t sa = 0; sa < SA; ++sa) {
            if (m[sa] == 0.0) continue;
            const double* x = X.data() + sa * b_in;
            for (std::size_t b = 0; b < b_in; ++b) y[b] += m[sa] * x[b];
        }
    }
    // L'(S', b') = Σ_{R, b} Y(S', R, b) W(b, b', R)
    DenseTensor next(Shape{S, b_out}, 0.0);
    auto out = next.data();
    for (std::size_t sp = 0; sp < S; ++sp) {
        for (std::size_t bo = 0; bo < b_out; ++bo) {
            double acc = 0.0;
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t b = 0; b < b_in; ++b) {
                    acc += Y[(sp * R + r) * b_in + b] * W[(b * b_out + bo) * R + r];
                }
            }
            out[sp * b_out + bo] = acc;
        }
    }
    return next;
}

DenseTensor ReturnNetwork::action_values(const DenseTensor& right_next, std::size_t t) const {
    check_timestep(t);
    const std::size_t S = states_;
    const std::size_t A = actions_;
    const std::size_t R = rewards_;
    const DenseTensor& w = sites_[t - 1];
    const std::size_t b_in = w.shape()[0];
    const std::size_t b_out = w.shape()[1];
    if (right_next.size() != S * b_out) {
        throw DimensionMismatchError(
            fmt::format("right boundary of size {} does not fit timestep {}", right_next.size(), t));
    }
    const auto Rn = right_next.data();
    const auto M = model_->at(t).data();
    const auto W = w.data();

    // Q(S', R, b) = Σ_b' W(b, b', R) R_{t+1}(S', b')
    std::vector<double> Q(S * R * b_in, 0.0);
    for (std::size_t sp = 0; sp < S; ++sp) {
        for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t b = 0; b < b_in; ++b) {
                double acc = 0.0;
                for (std::size_t bo = 0; bo < b_out; ++bo) {
                    acc += W[(b * b_out + bo) * R + r] * Rn[sp * b_out + bo];
                }
                Q[(sp * R + r) * b_in + b] = acc;
            }
        }
    }
    // V(S, A, b) = Σ_{S', R} M(S', R, S, A) Q(S', R, b)
    const std::size_t SA = S * A;
    DenseTensor values(Shape{S, A, b_in}, 0.0);
    auto V = values.data();
    for (std::size_t row = 0; row < S * R; ++row) {
        const double* m = M.data() + row * SA;
        const double* q = Q.data() + row * b_in;
        for (std::size_t sa = 0; sa < SA; ++sa) {
            if (m[sa] == 0.0) continue;
            double* v = V.data() + sa * b_in;
            for (std::size_t b = 0; b < b_in; ++b) v[b] += m[sa] * q[b];
        }
    }
    return values;
}

DenseTensor ReturnNetwork::retreat_right(const DenseTensor& action_values,
                                         const DenseTensor& policy_site) const {
    const std::size_t S = states_;
    const std::size_t A = actions_;
    const std::size_t b_in = action_values.shape()[2];
    const auto V = action_values.data();
    const auto pi = policy_site.data();
    DenseTensor right(Shape{S, b_in}, 0.0);
    auto out = right.data();
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t b = 0; b < b_in; ++b) {
            double acc = 0.0;
            for (std::size_t a = 0; a < A; ++a) acc += pi[a * S + s] * V[(s * A + a) * b_in + b];
            out[s * b_in + b] = acc;
        }
    }
    return right;
}

DenseTensor ReturnNetwork::environment(const DenseTensor& left, const DenseTensor& action_values) const {
    const std::size_t S = states_;
    const std::size_t A = actions_;
    const std::size_t b_in = action_values.shape()[2];
    if (left.size() != S * b_in) {
        throw DimensionMismatchError("left boundary does not match the action values' bond");
    }
    const auto L = left.data();
    const auto V = action_values.data();
    DenseTensor z(Shape{A, S}, 0.0);
    auto out = z.data();
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t s = 0; s < S; ++s) {
            double acc = 0.0;
            for (std::size_t b = 0; b < b_in; ++b) acc += L[s * b_in + b] * V[(s * A + a) * b_in + b];
            out[a * S + s] = acc;
        }
    }
    return z;
}

std::vector<DenseTensor> ReturnNetwork::left_boundaries(const PolicySet& policy) const {
    check_dimensions(*spec_, policy);
    std::vector<DenseTensor> lefts;
    lefts.reserve(spec_->horizon + 1);
    lefts.push_back(initial_left());
    for (std::size_t t = 1; t <= spec_->horizon; ++t) {
        lefts.push_back(advance_left(lefts.back(), joint_policy_site(policy, t), t));
    }
    return lefts;
}

double ReturnNetwork::expected_return(const PolicySet& policy) const {
    const DenseTensor last = left_boundaries(policy).back();
    return last.sum();
}

double ReturnNetwork::expected_return_reverse(const PolicySet& policy) const {
    check_dimensions(*spec_, policy);
    DenseTensor right = terminal_right();
    for (std::size_t t = spec_->horizon; t >= 1; --t) {
        right = retreat_right(action_values(right, t), joint_policy_site(policy, t));
    }
    return inner(initial_left(), right);
}

DenseTensor ReturnNetwork::joint_environment(const PolicySet& policy, std::size_t t) const {
    check_timestep(t);
    check_dimensions(*spec_, policy);
    DenseTensor left = initial_left();
    for (std::size_t k = 1; k < t; ++k) left = advance_left(left, joint_policy_site(policy, k), k);
    DenseTensor right = terminal_right();
    for (std::size_t k = spec_->horizon; k > t; --k) {
        right = retreat_right(action_values(right, k), joint_policy_site(policy, k));
    }
    return environment(left, action_values(right, t));
}

double expected_return(const FmdpSpec& spec, const TransitionModel& model, const PolicySet& policy,
                       const InitialDistribution& p0) {
    return ReturnNetwork(spec, model, p0).expected_return(policy);
}

double total_probability(const FmdpSpec& spec, const TransitionModel& model, const PolicySet& policy,
                         const InitialDistribution& p0) {
    return ReturnNetwork(spec, model, p0, flat_mpo(spec.horizon, spec.joint_rewards()))
        .expected_return(policy);
}

DenseTensor agent_environment(const DenseTensor& joint_z, const DenseTensor& other_policy,
                              std::size_t agent, std::size_t n_actions, std::size_t n_states) {
    const std::size_t A = n_actions;
    const std::size_t SS = n_states * n_states;
    if (joint_z.size() != A * A * SS || other_policy.size() != A * SS) {
        throw DimensionMismatchError("joint environment and policy sizes do not match");
    }
    const auto Z = joint_z.data();
    const auto pi = other_policy.data();
    DenseTensor z(Shape{A, n_states, n_states}, 0.0);
    auto out = z.data();
    for (std::size_t mine = 0; mine < A; ++mine) {
        for (std::size_t s = 0; s < SS; ++s) {
            double acc = 0.0;
            for (std::size_t other = 0; other < A; ++other) {
                const std::size_t a1 = agent == 0 ? mine : other;
                const std::size_t a2 = agent == 0 ? other : mine;
                acc += Z[(a1 * A + a2) * SS + s] * pi[other * SS + s];
            }
            out[mine * SS + s] = acc;
        }
    }
    return z;
}

EnvironmentTensor environment_tensor(const FmdpSpec& spec, const TransitionModel& model,
                                     const PolicySet& policy, const InitialDistribution& p0, std::size_t t,
                                     std::optional<std::size_t> agent) {
    const bool per_agent = policy.kind == PolicyKind::per_agent;
    if (per_agent != agent.has_value()) {
        throw std::invalid_argument("an agent must be given exactly when the policy is per-agent");
    }
    if (agent && *agent >= spec.n_agents) {
        throw std::out_of_range(fmt::format("agent {} outside 0..{}", *agent, spec.n_agents - 1));
    }
    const ReturnNetwork network(spec, model, p0);
    DenseTensor zj = network.joint_environment(policy, t);
    EnvironmentTensor env;
    env.timestep = t;
    env.agent = agent;
    if (per_agent) {
        env.z = agent_environment(zj, policy.at(t, 1 - *agent), *agent, spec.n_actions, spec.n_states);
    } else {
        env.z = std::move(zj).reshaped(policy_shape(spec, policy.kind));
    }
    return env;
}

} // namespace tnrl
