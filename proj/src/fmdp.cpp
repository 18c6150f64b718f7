#include "tnrl/fmdp.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace tnrl {

namespace {

std::size_t power(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
}

void expect_shape(const DenseTensor& t, const Shape& expected, const std::string& name,
                  const char* const* axis_names) {
    if (t.rank() != expected.size()) {
        throw DimensionMismatchError(
            fmt::format("{} has rank {}, expected {}", name, t.rank(), expected.size()));
    }
    for (std::size_t k = 0; k < expected.size(); ++k) {
        if (t.shape()[k] != expected[k]) {
            throw DimensionMismatchError(fmt::format("{} axis {} ({}) has length {}, expected {}", name,
                                                     k, axis_names[k], t.shape()[k], expected[k]));
        }
    }
}

constexpr const char* kSarlTransitionAxes[] = {"s_t", "r_t", "s_t-1", "a_t-1"};
constexpr const char* kJointTransitionAxes[] = {"s1_t",   "s2_t",   "r1_t",   "r2_t",
                                                "s1_t-1", "s2_t-1", "a1_t-1", "a2_t-1"};
constexpr const char* kSarlPolicyAxes[] = {"a", "s"};
constexpr const char* kJointPolicyAxes[] = {"a1", "a2", "s1", "s2"};
constexpr const char* kAgentPolicyAxes[] = {"a_i", "s1", "s2"};
constexpr const char* kInitialAxes[] = {"s1", "s2"};

void throw_if_any(std::vector<Violation> violations) {
    if (violations.empty()) return;
    std::string what = fmt::format("{} probability constraint violation(s)", violations.size());
    for (std::size_t i = 0; i < violations.size() && i < 3; ++i) what += "; " + violations[i].message;
    throw ValidationError(what, std::move(violations));
}

} // namespace

void require_valid(const TransitionModel& model) { throw_if_any(validate(model)); }
void require_valid(const PolicySet& policy) { throw_if_any(validate(policy)); }
void require_valid(const InitialDistribution& p0) { throw_if_any(validate(p0)); }

std::size_t FmdpSpec::joint_states() const { return power(n_states, n_agents); }
std::size_t FmdpSpec::joint_actions() const { return power(n_actions, n_agents); }
std::size_t FmdpSpec::joint_rewards() const { return power(n_rewards, n_agents); }

int FmdpSpec::action_value(std::size_t index) const {
    if (action_values.empty()) return static_cast<int>(index);
    return action_values.at(index);
}

void FmdpSpec::check() const {
    if (n_states == 0 || n_actions == 0 || n_rewards == 0 || horizon == 0) {
        throw std::invalid_argument("FMDP dimensions must all be at least 1");
    }
    if (n_agents != 1 && n_agents != 2) {
        throw std::invalid_argument(fmt::format("n_agents must be 1 or 2, got {}", n_agents));
    }
    if (reward_values.size() != n_rewards) {
        throw std::invalid_argument(fmt::format("{} reward values given for n_rewards = {}",
                                                reward_values.size(), n_rewards));
    }
    auto sorted = reward_values;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("reward values must be distinct");
    }
    if (!action_values.empty() && action_values.size() != n_actions) {
        throw std::invalid_argument(fmt::format("{} action values given for n_actions = {}",
                                                action_values.size(), n_actions));
    }
}

const DenseTensor& TransitionModel::at(std::size_t t) const {
    if (t < 1 || t > tensors.size()) {
        throw std::out_of_range(fmt::format("timestep {} outside 1..{}", t, tensors.size()));
    }
    return tensors[t - 1];
}

const DenseTensor& PolicySet::at(std::size_t t, std::size_t agent) const {
    if (t < 1 || t > sites.size()) {
        throw std::out_of_range(fmt::format("timestep {} outside 1..{}", t, sites.size()));
    }
    return sites[t - 1].at(agent);
}

DenseTensor& PolicySet::at(std::size_t t, std::size_t agent) {
    if (t < 1 || t > sites.size()) {
        throw std::out_of_range(fmt::format("timestep {} outside 1..{}", t, sites.size()));
    }
    return sites[t - 1].at(agent);
}

std::size_t PolicySet::action_axes() const noexcept { return kind == PolicyKind::joint ? 2 : 1; }

DenseTensor copy_tensor(std::size_t n, std::size_t rank) {
    if (rank < 2) throw std::invalid_argument("copy tensor needs rank >= 2");
    DenseTensor t(Shape(rank, n), 0.0);
    // Stride of the main diagonal is 1 + n + n^2 + ... + n^(rank-1).
    std::size_t diag_stride = 0;
    std::size_t p = 1;
    for (std::size_t k = 0; k < rank; ++k) {
        diag_stride += p;
        p *= n;
    }
    for (std::size_t i = 0; i < n; ++i) t.data()[i * diag_stride] = 1.0;
    return t;
}

DenseTensor flat(std::size_t n) {
    if (n == 0) throw std::invalid_argument("flat tensor needs n >= 1");
    return DenseTensor(Shape{n}, 1.0);
}

std::vector<Violation> validate_conditional(const DenseTensor& t, std::size_t outcome_axes,
                                            const std::string& name) {
    std::vector<Violation> out;
    const auto& shape = t.shape();
    const std::size_t n_out = product(std::span(shape).first(outcome_axes));
    const Shape cond_shape(shape.begin() + static_cast<std::ptrdiff_t>(outcome_axes), shape.end());
    const std::size_t n_cond = product(cond_shape);
    const auto data = t.data();

    for (std::size_t c = 0; c < n_cond; ++c) {
        double total = 0.0;
        double worst = 0.0;
        for (std::size_t o = 0; o < n_out; ++o) {
            const double v = data[o * n_cond + c];
            total += v;
            if (v < -kValidationTolerance || v > 1.0 + kValidationTolerance || std::isnan(v)) worst = v;
        }
        Index cond(cond_shape.size());
        std::size_t rem = c;
        for (std::size_t k = cond_shape.size(); k-- > 0;) {
            cond[k] = rem % cond_shape[k];
            rem /= cond_shape[k];
        }
        if (worst != 0.0) {
            out.push_back({name, cond, total,
                           fmt::format("{} has entry {} outside [0, 1] at conditioning index {}", name,
                                       worst, cond)});
        }
        if (!(std::abs(total - 1.0) <= kValidationTolerance)) {
            out.push_back({name, cond, total,
                           fmt::format("{} sums to {} at conditioning index {}", name, total, cond)});
        }
    }
    return out;
}

std::vector<Violation> validate(const TransitionModel& model) {
    std::vector<Violation> out;
    for (std::size_t t = 0; t < model.tensors.size(); ++t) {
        const auto& m = model.tensors[t];
        if (m.rank() % 2 != 0) {
            out.push_back({fmt::format("transition[t={}]", t + 1), {}, 0.0,
                           fmt::format("transition tensor has odd rank {}", m.rank())});
            continue;
        }
        auto v = validate_conditional(m, m.rank() / 2, fmt::format("transition[t={}]", t + 1));
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

std::vector<Violation> validate(const PolicySet& policy) {
    std::vector<Violation> out;
    for (std::size_t t = 0; t < policy.sites.size(); ++t) {
        for (std::size_t k = 0; k < policy.sites[t].size(); ++k) {
            const auto name = policy.kind == PolicyKind::per_agent
                                  ? fmt::format("policy[t={},agent={}]", t + 1, k + 1)
                                  : fmt::format("policy[t={}]", t + 1);
            auto v = validate_conditional(policy.sites[t][k], policy.action_axes(), name);
            out.insert(out.end(), v.begin(), v.end());
        }
    }
    return out;
}

std::vector<Violation> validate(const InitialDistribution& p0) {
    return validate_conditional(p0.p0, p0.p0.rank(), "p0");
}

Shape transition_shape(const FmdpSpec& spec) {
    const auto S = spec.n_states;
    const auto R = spec.n_rewards;
    const auto A = spec.n_actions;
    if (spec.n_agents == 1) return {S, R, S, A};
    return {S, S, R, R, S, S, A, A};
}

Shape policy_shape(const FmdpSpec& spec, PolicyKind kind) {
    const auto S = spec.n_states;
    const auto A = spec.n_actions;
    switch (kind) {
    case PolicyKind::single:
        return {A, S};
    case PolicyKind::joint:
        return {A, A, S, S};
    case PolicyKind::per_agent:
        return {A, S, S};
    }
    return {};
}

Shape initial_shape(const FmdpSpec& spec) {
    if (spec.n_agents == 1) return {spec.n_states};
    return {spec.n_states, spec.n_states};
}

void check_dimensions(const FmdpSpec& spec, const TransitionModel& model) {
    if (model.horizon() != spec.horizon) {
        throw DimensionMismatchError(fmt::format("transition model has {} timesteps, horizon is {}",
                                                 model.horizon(), spec.horizon));
    }
    const auto expected = transition_shape(spec);
    const auto* names = spec.n_agents == 1 ? kSarlTransitionAxes : kJointTransitionAxes;
    for (std::size_t t = 0; t < model.tensors.size(); ++t) {
        expect_shape(model.tensors[t], expected, fmt::format("transition[t={}]", t + 1), names);
    }
}

void check_dimensions(const FmdpSpec& spec, const PolicySet& policy) {
    if (policy.horizon() != spec.horizon) {
        throw DimensionMismatchError(
            fmt::format("policy has {} timesteps, horizon is {}", policy.horizon(), spec.horizon));
    }
    const bool single = policy.kind == PolicyKind::single;
    if (single != (spec.n_agents == 1)) {
        throw DimensionMismatchError(
            fmt::format("policy kind does not match a {}-agent model", spec.n_agents));
    }
    const auto expected = policy_shape(spec, policy.kind);
    const std::size_t per_site = policy.kind == PolicyKind::per_agent ? spec.n_agents : 1;
    const char* const* names = policy.kind == PolicyKind::single  ? kSarlPolicyAxes
                               : policy.kind == PolicyKind::joint ? kJointPolicyAxes
                                                                  : kAgentPolicyAxes;
    for (std::size_t t = 0; t < policy.sites.size(); ++t) {
        if (policy.sites[t].size() != per_site) {
            throw DimensionMismatchError(fmt::format("policy[t={}] has {} tensors, expected {}", t + 1,
                                                     policy.sites[t].size(), per_site));
        }
        for (std::size_t k = 0; k < per_site; ++k) {
            expect_shape(policy.sites[t][k], expected, fmt::format("policy[t={}]", t + 1), names);
        }
    }
}

void check_dimensions(const FmdpSpec& spec, const InitialDistribution& p0) {
    expect_shape(p0.p0, initial_shape(spec), "p0", kInitialAxes);
}

PolicySet uniform_policy(const FmdpSpec& spec, PolicyKind kind) {
    PolicySet p;
    p.kind = kind;
    const auto shape = policy_shape(spec, kind);
    const double value = kind == PolicyKind::joint ? 1.0 / static_cast<double>(spec.joint_actions())
                                                   : 1.0 / static_cast<double>(spec.n_actions);
    const std::size_t per_site = kind == PolicyKind::per_agent ? spec.n_agents : 1;
    p.sites.assign(spec.horizon, std::vector<DenseTensor>(per_site, DenseTensor(shape, value)));
    return p;
}

InitialDistribution point_initial(const FmdpSpec& spec, std::size_t state) {
    DenseTensor p(initial_shape(spec), 0.0);
    if (spec.n_agents == 1) {
        p({state}) = 1.0;
    } else {
        p({state, state}) = 1.0;
    }
    return {std::move(p)};
}

DenseTensor joint_policy_site(const PolicySet& policy, std::size_t t) {
    switch (policy.kind) {
    case PolicyKind::single:
        return policy.at(t);
    case PolicyKind::joint:
        return policy.at(t);
    case PolicyKind::per_agent: {
        // π1(a1, s1, s2) π2(a2, s1, s2) -> (s1, s2, a1, a2) -> (a1, a2, s1, s2)
        const auto& p1 = policy.at(t, 0);
        const auto& p2 = policy.at(t, 1);
        return contract_shared(p1, p2, {{1, 1}, {2, 2}}, {}).permute({2, 3, 0, 1});
    }
    }
    throw std::logic_error("unknown policy kind");
}

} // namespace tnrl
